"""Finite joint distributions and the information functionals built on them.

Probabilities are held either as float64 arrays or as object arrays of
``fractions.Fraction`` (rational mode). Entropies are always returned as
floats in bits; rational mode exists so that conditional independence of
constructed channels can be decided exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

SUM_TOL = 1e-12
MI_CLAMP = 1e-12

VarSet = frozenset  # a set of variable names drawn from a DiscretePMF


class ProbError(ValueError):
    pass


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    # decimal repr, so 0.1 becomes 1/10 rather than its binary expansion
    return Fraction(str(v))


@dataclass(frozen=True, eq=False)
class DiscretePMF:
    """A probability table over named finite variables.

    ``probs`` has one axis per variable, in the order of ``names``.
    """

    names: tuple[str, ...]
    sizes: tuple[int, ...]
    probs: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        sizes = tuple(int(s) for s in self.sizes)
        if len(set(names)) != len(names):
            raise ProbError(f"duplicate variable names in {names}")
        if len(names) != len(sizes):
            raise ProbError("names and sizes differ in length")
        if any(s < 1 for s in sizes):
            raise ProbError(f"alphabet sizes must be >= 1, got {sizes}")
        probs = np.asarray(self.probs)
        if probs.size != int(np.prod(sizes, dtype=np.int64)):
            raise ProbError(
                f"table has {probs.size} entries, expected {int(np.prod(sizes))}")
        probs = probs.reshape(sizes)
        if probs.dtype == object:
            probs = np.vectorize(_as_fraction, otypes=[object])(probs) if probs.size else probs
            if any(v < 0 for v in probs.flat):
                raise ProbError("negative probability")
            if sum(probs.flat, Fraction(0)) != 1:
                raise ProbError("probabilities do not sum to 1")
        else:
            probs = probs.astype(np.float64, copy=True)
            if np.any(probs < 0) or not np.all(np.isfinite(probs)):
                raise ProbError("negative or non-finite probability")
            if abs(probs.sum() - 1.0) > SUM_TOL:
                raise ProbError(f"probabilities sum to {probs.sum()!r}")
        probs.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "probs", probs)

    @property
    def exact(self) -> bool:
        return self.probs.dtype == object

    def size_of(self, name: str) -> int:
        return self.sizes[self.index(name)]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ProbError(f"unknown variable {name!r}; have {self.names}") from None

    def float_probs(self) -> np.ndarray:
        if self.exact:
            return np.array([float(v) for v in self.probs.flat]).reshape(self.sizes)
        return self.probs

    def to_float(self) -> "DiscretePMF":
        return self if not self.exact else DiscretePMF(self.names, self.sizes, self.float_probs())

    def to_json(self) -> dict:
        if self.exact:
            flat = [str(v) for v in self.probs.flat]
        else:
            flat = [float(v) for v in self.probs.flat]
        return {
            "variables": [{"name": n, "size": s} for n, s in zip(self.names, self.sizes)],
            "probs": flat,
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "DiscretePMF":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            names = tuple(v["name"] for v in data["variables"])
            sizes = tuple(int(v["size"]) for v in data["variables"])
            raw = data["probs"]
        except (KeyError, TypeError) as exc:
            raise ProbError(f"malformed DiscretePMF JSON: {exc}") from exc
        if any(isinstance(v, str) for v in raw):
            probs = np.array([_as_fraction(v) for v in raw], dtype=object)
        else:
            probs = np.asarray(raw, dtype=np.float64)
        return cls(names, sizes, probs)


def _varset(p: DiscretePMF, A: Iterable[str] | str | None) -> frozenset:
    if A is None:
        return frozenset()
    if isinstance(A, str):
        A = (A,)
    A = frozenset(A)
    for name in A:
        p.index(name)
    return A


def marginalize(p: DiscretePMF, keep: Iterable[str]) -> DiscretePMF:
    """Marginal over ``keep``; variables stay in the parent's order."""
    keep = _varset(p, keep)
    drop = tuple(i for i, n in enumerate(p.names) if n not in keep)
    if not drop:
        return p
    probs = p.probs.sum(axis=drop)
    names = tuple(n for n in p.names if n in keep)
    sizes = tuple(p.size_of(n) for n in names)
    return DiscretePMF(names, sizes, np.asarray(probs, dtype=p.probs.dtype).reshape(sizes))


def _marginal_array(p: DiscretePMF, A: frozenset) -> np.ndarray:
    drop = tuple(i for i, n in enumerate(p.names) if n not in A)
    arr = p.float_probs()
    return arr.sum(axis=drop) if drop else arr


def _entropy_of_array(arr: np.ndarray) -> float:
    q = np.asarray(arr, dtype=np.float64).ravel()
    q = q[q > 0]
    return float(-(q * np.log2(q)).sum())


def entropy(p: DiscretePMF, A: Iterable[str] | str) -> float:
    """Joint entropy H(A) in bits, with 0 log 0 = 0."""
    if p.probs.size == 0:
        raise ProbError("empty distribution")
    A = _varset(p, A)
    if not A:
        return 0.0
    return _entropy_of_array(_marginal_array(p, A))


def _check_disjoint(*sets: frozenset) -> None:
    seen: set = set()
    for s in sets:
        if seen & s:
            raise ProbError(f"variable sets overlap on {sorted(seen & s)}")
        seen |= s


def mutual_information(p: DiscretePMF, A, B, C=None) -> float:
    """I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C), clamped at zero."""
    A, B, C = _varset(p, A), _varset(p, B), _varset(p, C)
    _check_disjoint(A, B, C)
    value = entropy(p, A | C) + entropy(p, B | C) - entropy(p, A | B | C) - entropy(p, C)
    if value < 0:
        if value < -1e-9:
            raise ProbError(f"mutual information {value} is negative beyond rounding")
        return 0.0
    return value


def _three_way(p: DiscretePMF, A, B, C) -> np.ndarray:
    """Table of p(a, b, c) with each group flattened to a single axis."""
    order = [n for n in p.names if n in A] + [n for n in p.names if n in B] + \
        [n for n in p.names if n in C]
    sub = marginalize(p, A | B | C)
    axes = [sub.index(n) for n in order]
    arr = np.transpose(sub.probs, axes)
    shape = tuple(int(np.prod([p.size_of(n) for n in G], dtype=np.int64)) for G in
                  ([n for n in order if n in A], [n for n in order if n in B],
                   [n for n in order if n in C]))
    return arr.reshape(shape)


def factorizes(p: DiscretePMF, A, B, C) -> bool:
    """Exact test of p(a,b,c) p(b) == p(a,b) p(b,c) for rational tables."""
    A, B, C = _varset(p, A), _varset(p, B), _varset(p, C)
    _check_disjoint(A, B, C)
    t = _three_way(p, A, B, C)
    pab = t.sum(axis=2)
    pbc = t.sum(axis=0)
    pb = pab.sum(axis=0)
    lhs = t * pb[None, :, None]
    rhs = pab[:, :, None] * pbc[None, :, :]
    return bool(np.all(lhs == rhs))


def markov_violation(p: DiscretePMF, A, B, C) -> float:
    """I(A;C|B), reported as exactly 0 when a rational table factorizes."""
    A, B, C = _varset(p, A), _varset(p, B), _varset(p, C)
    _check_disjoint(A, B, C)
    if p.exact and factorizes(p, A, B, C):
        return 0.0
    return mutual_information(p, A, C, B)


def is_markov_chain(p: DiscretePMF, A, B, C, tol: float = 1e-9) -> bool:
    """True iff A - B - C, judged by I(A;C|B) <= tol."""
    return markov_violation(p, A, B, C) <= tol


# -- constructors ---------------------------------------------------------

def uniform(names: Sequence[str], sizes: Sequence[int], exact: bool = False) -> DiscretePMF:
    n = int(np.prod(sizes, dtype=np.int64))
    if exact:
        probs = np.array([Fraction(1, n)] * n, dtype=object)
    else:
        probs = np.full(n, 1.0 / n)
    return DiscretePMF(tuple(names), tuple(sizes), probs)


def point_mass(names: Sequence[str], sizes: Sequence[int], outcome: Sequence[int],
               exact: bool = False) -> DiscretePMF:
    if exact:
        probs = np.full(tuple(sizes), Fraction(0), dtype=object)
        probs[tuple(outcome)] = Fraction(1)
    else:
        probs = np.zeros(tuple(sizes))
        probs[tuple(outcome)] = 1.0
    return DiscretePMF(tuple(names), tuple(sizes), probs)


def random_pmf(names: Sequence[str], sizes: Sequence[int], rng: np.random.Generator,
               exact: bool = False, alpha: float = 1.0) -> DiscretePMF:
    """Random full-support table; rational mode draws integer weights."""
    n = int(np.prod(sizes, dtype=np.int64))
    if exact:
        w = rng.integers(1, 64, size=n)
        total = int(w.sum())
        probs = np.array([Fraction(int(v), total) for v in w], dtype=object)
    else:
        probs = rng.dirichlet(np.full(n, alpha))
        probs = np.maximum(probs, 1e-300)
        probs = probs / probs.sum()
    return DiscretePMF(tuple(names), tuple(sizes), probs)
