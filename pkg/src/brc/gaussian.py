"""Capacity region of the degraded Gaussian BRC with a common relay.

Y1 = X + X1 + N1, Y2 = X + X1 + N2, Z1 = X + N1t with powers P (source)
and P1 (relay). For every (alpha, beta, gamma) in a grid over [0, 1]^3 the
four closed-form bounds give a small polytope in (R0, R1); the region is the
downward-closed hull of their union.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import workers_from_env
from .regions import RateRegion, hull_of


def cap(x):
    """C(x) = 1/2 log2(1 + x) in bits; accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("C(x) needs x >= 0")
    out = 0.5 * np.log2(1.0 + x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaussianBrcParams:
    P: float = 1.0
    P1: float = 1.0
    N1: float = 1.0
    N2: float = 1.0
    N1t: float = 1.0   # relay noise variance

    def __post_init__(self):
        for k in ("P", "P1", "N1", "N2", "N1t"):
            v = getattr(self, k)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{k} must be a positive finite number, got {v!r}")

    def scaled(self, **kw) -> "GaussianBrcParams":
        d = {k: getattr(self, k) for k in ("P", "P1", "N1", "N2", "N1t")}
        d.update(kw)
        return GaussianBrcParams(**d)


@dataclass(frozen=True)
class SweepSpec:
    """Endpoint-inclusive uniform grids over alpha, beta, gamma."""

    n_alpha: int = 26
    n_beta: int = 26
    n_gamma: int = 26

    def __post_init__(self):
        if min(self.n_alpha, self.n_beta, self.n_gamma) < 2:
            raise ValueError("each grid needs at least its two endpoints")

    @classmethod
    def uniform(cls, n: int) -> "SweepSpec":
        return cls(n, n, n)

    def grids(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (np.linspace(0.0, 1.0, self.n_alpha), np.linspace(0.0, 1.0, self.n_beta),
                np.linspace(0.0, 1.0, self.n_gamma))

    def refined(self) -> "SweepSpec":
        """Halved spacing; every coarse grid value stays on the fine grid."""
        return SweepSpec(2 * self.n_alpha - 1, 2 * self.n_beta - 1, 2 * self.n_gamma - 1)


def cell_bounds(params: GaussianBrcParams, alpha, beta, gamma) -> dict[str, np.ndarray]:
    """The four bounds on a broadcast grid of (alpha, beta, gamma)."""
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    g = np.asarray(gamma, dtype=float)
    P, P1 = params.P, params.P1
    # total received power with correlation 1 - beta between source and relay
    S = P + P1 + 2.0 * np.sqrt((1.0 - b) * P * P1)
    r0 = cap(a * S / ((1.0 - a) * S + params.N2))
    r1_direct = cap((1.0 - a) * S / params.N1)
    r1_relay = cap(b * g * P / params.N1t)
    total = cap(b * P / params.N1t)
    shape = np.broadcast(a, b, g).shape
    return {k: np.broadcast_to(v, shape) for k, v in
            (("r0", r0), ("r1_direct", r1_direct), ("r1_relay", r1_relay), ("sum", total))}


def _cell_corners(r0, r1, s) -> np.ndarray:
    """The two non-trivial vertices of {R0 <= r0, R1 <= r1, R0 + R1 <= s}."""
    x0 = np.minimum(r0, s)
    p = np.stack([x0, np.clip(np.minimum(r1, s - x0), 0.0, None)], axis=-1)
    y1 = np.minimum(r1, s)
    q = np.stack([np.clip(np.minimum(r0, s - y1), 0.0, None), y1], axis=-1)
    return np.concatenate([p.reshape(-1, 2), q.reshape(-1, 2)])


@dataclass
class GaussianSweep:
    """Region plus the per-cell bound arrays (the witness record)."""

    params: GaussianBrcParams
    spec: SweepSpec
    region: RateRegion
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    bounds: dict = field(repr=False)   # name -> (n_alpha, n_beta, n_gamma) array

    def cell(self, alpha: float, beta: float, gamma: float) -> dict[str, float]:
        """Bounds at the grid point nearest to (alpha, beta, gamma)."""
        i = int(np.argmin(np.abs(self.alpha - alpha)))
        j = int(np.argmin(np.abs(self.beta - beta)))
        k = int(np.argmin(np.abs(self.gamma - gamma)))
        out = {name: float(arr[i, j, k]) for name, arr in self.bounds.items()}
        out.update(alpha=float(self.alpha[i]), beta=float(self.beta[j]),
                   gamma=float(self.gamma[k]))
        out["r0_reach"] = min(out["r0"], out["sum"])
        return out


def gaussian_sweep(params: GaussianBrcParams, spec: SweepSpec | None = None,
                   workers: int | None = None) -> GaussianSweep:
    spec = spec or SweepSpec()
    A, B, G = spec.grids()
    cap_w = workers_from_env(0)
    workers = (cap_w or 1) if workers is None else (min(workers, cap_w) if cap_w else workers)
    workers = max(1, workers)

    def slab(i):
        bd = cell_bounds(params, A[i], B[:, None], G[None, :])
        r1 = np.minimum(bd["r1_direct"], bd["r1_relay"])
        pts = _cell_corners(bd["r0"], r1, bd["sum"])
        # each alpha slice is reduced to its own hull vertices first
        return bd, hull_of(pts).vertices

    idx = list(range(len(A)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(slab, idx))
    else:
        parts = [slab(i) for i in idx]
    bounds = {k: np.stack([p[0][k] for p in parts]) for k in parts[0][0]}
    region = hull_of(np.concatenate([p[1] for p in parts]))
    return GaussianSweep(params, spec, region, A, B, G, bounds)


def gaussian_region(params: GaussianBrcParams, spec: SweepSpec | None = None,
                    workers: int | None = None) -> RateRegion:
    return gaussian_sweep(params, spec, workers).region


@dataclass(frozen=True)
class GaussianExtremes:
    r1_only: float
    r1_argmax: tuple
    r0_only: float
    r0_argmax: tuple
    sum_rate: float


def gaussian_extremes(params: GaussianBrcParams, spec: SweepSpec | None = None) -> GaussianExtremes:
    """Single-user corners and the largest R0 + R1 over the grid."""
    sw = gaussian_sweep(params, spec)
    bd = sw.bounds
    r1 = np.minimum(np.minimum(bd["r1_direct"], bd["r1_relay"]), bd["sum"])
    r0 = np.minimum(bd["r0"], bd["sum"])
    i1 = np.unravel_index(int(np.argmax(r1)), r1.shape)
    i0 = np.unravel_index(int(np.argmax(r0)), r0.shape)
    grid = (sw.alpha, sw.beta, sw.gamma)
    at = lambda ix: tuple(float(g[i]) for g, i in zip(grid, ix))
    s = float(np.max(sw.region.vertices.sum(axis=1)))
    return GaussianExtremes(float(r1[i1]), at(i1), float(r0[i0]), at(i0), s)
