"""Seeded sampling of factorized joint distributions over auxiliaries and inputs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .prob import DiscretePMF

DEFAULT_SEED = 0xB12C
_REFINE_TAG = 1_000_003


@dataclass(frozen=True)
class AuxSpec:
    """Auxiliary cardinalities and the search budget.

    ``samples`` random PDs are drawn, PD ``i`` from its own generator seeded by
    ``(seed, i)``. Each complete block of ``block`` samples is followed by
    ``refine_steps`` rounds of coordinate refinement per sweep direction.
    """

    cardinalities: Mapping[str, int] = field(default_factory=dict)
    samples: int = 256
    refine_steps: int = 4
    block: int = 64
    seed: int = DEFAULT_SEED
    strata: tuple[float, ...] = (0.1, 0.3, 1.0, 3.0)

    def __post_init__(self):
        if any(int(c) < 1 for c in self.cardinalities.values()):
            raise ValueError("auxiliary cardinalities must be >= 1")
        if self.samples < 1 or self.block < 1 or self.refine_steps < 0:
            raise ValueError("search budget must be >= 1")
        object.__setattr__(self, "cardinalities",
                           {k: int(v) for k, v in self.cardinalities.items()})

    def card(self, name: str, default: int = 2) -> int:
        return self.cardinalities.get(name, default)

    def to_json(self) -> dict:
        return {"cardinalities": dict(self.cardinalities), "samples": self.samples,
                "refine_steps": self.refine_steps, "block": self.block, "seed": self.seed,
                "strata": list(self.strata)}

    @classmethod
    def from_json(cls, data: dict | str) -> "AuxSpec":
        if isinstance(data, str):
            data = json.loads(data)
        unknown = set(data) - {"cardinalities", "samples", "refine_steps", "block", "seed",
                               "strata"}
        if unknown:
            raise ValueError(f"unknown aux spec keys {sorted(unknown)}")
        kw = dict(data)
        if "strata" in kw:
            kw["strata"] = tuple(float(a) for a in kw["strata"])
        return cls(**kw)


@dataclass(frozen=True)
class Factor:
    """Conditional table P(vars | parents)."""

    vars: tuple[str, ...]
    parents: tuple[str, ...] = ()


class PDModel:
    """A joint law written as a product of conditional factors."""

    def __init__(self, names: Sequence[str], sizes: Sequence[int], factors: Sequence[Factor]):
        self.names = tuple(names)
        self.sizes = tuple(int(s) for s in sizes)
        self.factors = tuple(factors)
        covered = [v for f in self.factors for v in f.vars]
        if sorted(covered) != sorted(self.names):
            raise ValueError(f"factors cover {covered}, model has {self.names}")
        self._size = dict(zip(self.names, self.sizes))

    def factor_shape(self, f: Factor) -> tuple[int, int]:
        rows = int(np.prod([self._size[p] for p in f.parents], dtype=np.int64))
        cols = int(np.prod([self._size[v] for v in f.vars], dtype=np.int64))
        return rows, cols

    def sample(self, rng: np.random.Generator, alpha: float) -> list[np.ndarray]:
        params = []
        for f in self.factors:
            w = rng.gamma(alpha, size=self.factor_shape(f))
            params.append(_normalize(w))
        return params

    def perturb(self, params: list[np.ndarray], which: int, rng: np.random.Generator,
                scale: float) -> list[np.ndarray]:
        out = list(params)
        w = params[which]
        noise = rng.standard_normal(w.shape)
        # zero entries get a small floor so refinement can leave a vertex
        out[which] = _normalize((w + 1e-3 * scale) * np.exp(scale * noise))
        return out

    def joint(self, params: list[np.ndarray]) -> np.ndarray:
        joint = np.ones(self.sizes)
        for f, w in zip(self.factors, params):
            axes = f.parents + f.vars
            arr = w.reshape([self._size[a] for a in axes])
            order = sorted(range(len(axes)), key=lambda i: self.names.index(axes[i]))
            arr = np.transpose(arr, order)
            shape = [self._size[n] if n in axes else 1 for n in self.names]
            joint = joint * arr.reshape(shape)
        return joint / joint.sum()

    def pmf(self, params: list[np.ndarray]) -> DiscretePMF:
        return DiscretePMF(self.names, self.sizes, self.joint(params))


def _normalize(w: np.ndarray) -> np.ndarray:
    s = w.sum(axis=-1, keepdims=True)
    bad = ~(s > 0)[..., 0]
    if np.any(bad):
        w = w.copy()
        w[bad] = 1.0
        s = w.sum(axis=-1, keepdims=True)
    return w / s


def sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def refine_rng(seed: int, block: int, direction: int) -> np.random.Generator:
    return np.random.default_rng([seed, _REFINE_TAG, block, direction])
