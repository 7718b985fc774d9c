"""Downward-closed rate regions in two and three dimensions.

A region is the convex hull of a point cloud together with every
coordinate-wise projection of those points toward the origin. It is stored
as sorted hull vertices plus a halfspace list ``a . R <= b``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError

EPS = 1e-9
_ACTIVE = 1e-12
_CHUNK = 200_000


class RegionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RateRegion:
    dim: int
    vertices: np.ndarray    # (k, dim), descending lexicographic order
    halfspaces: np.ndarray  # (m, dim + 1), rows [a, b] meaning a . R <= b

    @property
    def A(self) -> np.ndarray:
        return self.halfspaces[:, :-1]

    @property
    def b(self) -> np.ndarray:
        return self.halfspaces[:, -1]

    def project(self, axes: tuple[int, ...]) -> "RateRegion":
        """Projection onto the given coordinates (equal to the slice, by closure)."""
        return hull_of(self.vertices[:, list(axes)])

    def frontier(self) -> np.ndarray:
        """Vertices that are not dominated coordinate-wise by another vertex."""
        V = self.vertices
        keep = []
        for i, v in enumerate(V):
            dominated = np.any(np.all(V >= v - 1e-12, axis=1) & np.any(V > v + 1e-12, axis=1))
            if not dominated:
                keep.append(i)
        return V[keep]


def _sorted_rows(M: np.ndarray) -> np.ndarray:
    if len(M) == 0:
        return M
    order = np.lexsort(tuple(-M[:, j] for j in reversed(range(M.shape[1]))))
    return M[order]


def _closure_generators(P: np.ndarray) -> np.ndarray:
    d = P.shape[1]
    masks = np.array(list(itertools.product((0.0, 1.0), repeat=d)))
    G = (P[:, None, :] * masks[None, :, :]).reshape(-1, d)
    return np.unique(G, axis=0)


def _hull_vertices(G: np.ndarray) -> np.ndarray:
    """Extreme points of a downward-closed generator set (active axes only)."""
    try:
        hull = ConvexHull(G)
    except QhullError as exc:  # pragma: no cover - guarded by caller
        raise RegionError(f"hull construction failed: {exc}") from exc
    return G[np.sort(hull.vertices)]


def hull_of(points: Iterable, closed: bool = False) -> RateRegion:
    """Convex, downward-closed hull of a non-empty set of rate points."""
    P = np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=float)
    if P.ndim != 2 or len(P) == 0:
        raise RegionError("hull_of needs at least one point")
    d = P.shape[1]
    if d not in (1, 2, 3):
        raise RegionError(f"dimension {d} not supported")
    if np.any(P < -EPS):
        raise RegionError("rate points must be non-negative")
    P = np.maximum(P, 0.0)
    hi = P.max(axis=0)
    active = [j for j in range(d) if hi[j] > _ACTIVE]

    inactive_rows = []
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        if j not in active:
            inactive_rows.append(np.append(e, 0.0))

    if len(active) <= 1:
        V = np.zeros((1, d))
        rows = list(inactive_rows)
        if active:
            j = active[0]
            V = np.zeros((2, d))
            V[0, j] = hi[j]
            e = np.zeros(d)
            e[j] = 1.0
            rows.append(np.append(e, hi[j]))
        for j in range(d):
            e = np.zeros(d)
            e[j] = -1.0
            rows.append(np.append(e, 0.0))
        return RateRegion(d, _sorted_rows(V), np.array(rows))

    Q = P[:, active]
    # reduce large clouds in chunks; hull vertices of a union are among the
    # hull vertices of its parts
    while len(Q) > _CHUNK:
        parts = [_hull_vertices(_closure_generators(Q[i:i + _CHUNK]))
                 for i in range(0, len(Q), _CHUNK)]
        Q = np.concatenate(parts)
    G = Q if closed else _closure_generators(Q)
    if closed:
        G = np.unique(np.vstack([G, np.zeros((1, len(active))),
                                 np.diag(Q.max(axis=0))]), axis=0)
    hull = ConvexHull(G)
    Vq = G[np.sort(hull.vertices)]
    eq = hull.equations  # normal . x + offset <= 0
    H = np.zeros((len(eq), d + 1))
    H[:, active] = eq[:, :-1]
    H[:, -1] = -eq[:, -1]
    H = np.unique(np.round(H, 12), axis=0)
    if inactive_rows:
        H = np.vstack([H, np.array(inactive_rows)])
    V = np.zeros((len(Vq), d))
    V[:, active] = Vq
    return RateRegion(d, _sorted_rows(V), H)


def _check_point(region: RateRegion, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (region.dim,):
        raise RegionError(f"point of dimension {p.shape} vs region dimension {region.dim}")
    return p


def margin(region: RateRegion, p) -> float:
    """Smallest halfspace slack b - a . p (negative when outside)."""
    p = _check_point(region, p)
    return float(np.min(region.b - region.A @ p))


def contains(region: RateRegion, p, tol: float = EPS) -> bool:
    return margin(region, p) >= -tol


class Inclusion(NamedTuple):
    holds: bool
    violator: np.ndarray | None
    margin: float

    def __bool__(self):
        return self.holds


def includes(outer: RateRegion, inner: RateRegion, tol: float = EPS) -> Inclusion:
    """Whether every vertex of ``inner`` lies in ``outer`` within ``tol``."""
    if outer.dim != inner.dim:
        raise RegionError(f"dimension mismatch: {outer.dim} vs {inner.dim}")
    slack = outer.b[None, :] - inner.vertices @ outer.A.T
    per_vertex = slack.min(axis=1)
    worst = int(np.argmin(per_vertex))
    m = float(per_vertex[worst])
    if m >= -tol:
        return Inclusion(True, None, m)
    return Inclusion(False, inner.vertices[worst].copy(), m)


def support(region: RateRegion, direction) -> float:
    w = np.asarray(direction, dtype=float)
    if w.shape != (region.dim,):
        raise RegionError("direction dimension mismatch")
    if np.any(w < 0) or not np.any(w > 0):
        raise RegionError("direction must be non-negative and non-zero")
    return float(np.max(region.vertices @ w))


def sweep_directions(dim: int, n: int | None = None) -> np.ndarray:
    """Non-negative unit directions used for frontier scans.

    2-D: ``n`` (default 32) evenly spaced angles in [0, pi/2]. 3-D: every
    non-zero vector with entries in {0, 1, 2}, deduplicated by direction.
    """
    if dim == 2:
        t = np.linspace(0.0, np.pi / 2, n or 32)
        return np.column_stack([np.cos(t), np.sin(t)])
    if dim == 3:
        dirs = []
        for v in itertools.product((0, 1, 2), repeat=3):
            v = np.array(v, dtype=float)
            if not v.any():
                continue
            u = v / np.linalg.norm(v)
            if not any(np.allclose(u, w) for w in dirs):
                dirs.append(u)
        return np.array(dirs)
    raise RegionError(f"dimension {dim} not supported")


class PolytopeFamily:
    """Vertex enumeration for ``{R >= 0, A R <= b}`` with a fixed ``A``.

    All square subsystems are pre-factored once, so each call only solves for
    the candidate vertices of a new right-hand side.
    """

    def __init__(self, A):
        A = np.asarray(A, dtype=float)
        m, d = A.shape
        self.A = A
        self.dim = d
        full = np.vstack([A, -np.eye(d)])
        combos, invs = [], []
        for idx in itertools.combinations(range(m + d), d):
            M = full[list(idx)]
            if abs(np.linalg.det(M)) > 1e-12:
                combos.append(idx)
                invs.append(np.linalg.inv(M))
        self._full = full
        self._combos = np.array(combos)
        self._invs = np.array(invs)

    def vertices(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        bb = np.concatenate([b, np.zeros(self.dim)])
        rhs = bb[self._combos]                      # (k, d)
        cand = np.einsum("kij,kj->ki", self._invs, rhs)
        ok = np.all(cand @ self._full.T <= bb + 1e-10, axis=1)
        V = np.maximum(cand[ok], 0.0)
        return np.unique(np.round(V, 13), axis=0)
