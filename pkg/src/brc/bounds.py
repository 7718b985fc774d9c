"""Numerical evaluation of the rate-region formulas for discrete channels.

Every evaluator searches a family of joint PDs over auxiliaries and channel
inputs, turns each PD into a small polytope of rate vectors and returns the
downward-closed convex hull of their union (time sharing). Vertices of the
result carry the PD that produced them.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channels import (BrcChannel, BrcCrChannel, BroadcastChannel, Channel, broadcast_part,
                       classify_brc_cr, induced_joint, silence_relays, tie_relays)
from .prob import DiscretePMF, entropy
from .regions import PolytopeFamily, RateRegion, hull_of, sweep_directions
from .sampling import AuxSpec, Factor, PDModel, refine_rng, sample_rng

log = logging.getLogger(__name__)

REPRO_TOL = 1e-9


class BoundsError(ValueError):
    pass


# -- information oracle ---------------------------------------------------

def _names(s: str) -> frozenset:
    return frozenset(n for n in s.replace(" ", "").split(",") if n)


class InfoOracle:
    """Memoized I(A;B|C) on one joint distribution; records every term used."""

    def __init__(self, joint: DiscretePMF):
        self.joint = joint
        self._h: dict = {}
        self.terms: dict[str, float] = {}

    def H(self, S: frozenset) -> float:
        if S not in self._h:
            self._h[S] = entropy(self.joint, S) if S else 0.0
        return self._h[S]

    def __call__(self, a: str, b: str, c: str = "") -> float:
        A, B, C = _names(a), _names(b), _names(c)
        v = self.H(A | C) + self.H(B | C) - self.H(A | B | C) - self.H(C)
        v = max(v, 0.0)
        key = f"I({a};{b}|{c})" if c else f"I({a};{b})"
        self.terms[key] = v
        return v


# -- formulas ---------------------------------------------------------------

def theorem1_rows(I: InfoOracle) -> list[float]:
    """Right-hand sides of the five rate-sum bounds of the general inner bound."""
    t = I.terms
    for b, bb in ((1, 2), (2, 1)):
        Ib = min(I(f"U0,U{b}", f"Z{b}", f"V0,X{b}") + I(f"U{b+2}", f"Y{b}", f"U0,V0,X{b},U{b}"),
                 I(f"U0,V0,U{b},U{b+2},X{b}", f"Y{b}"))
        Jb = min(I(f"U{b}", f"Z{b}", f"U0,V0,X{b}") + I(f"U{b+2}", f"Y{b}", f"U0,V0,X{b},U{b}"),
                 I(f"U{b+2},U{b},X{b}", f"Y{b}", "U0,V0"))
        t[f"I_{b}"], t[f"J_{b}"] = Ib, Jb
    IM = t["I_M"] = I("U3", "U4", "U1,U2,X1,X2,U0,V0")
    I1, I2, J1, J2 = t["I_1"], t["I_2"], t["J_1"], t["J_2"]
    leak1 = I("U0,U1", "X2", "X1,V0")
    leak2 = I("U0,U2", "X1", "X2,V0")
    return [
        I1 - leak1,
        I2 - leak2,
        I1 + J2 - leak1 - I("U1,X1", "U2", "X2,U0,V0") - IM,
        J1 + I2 - leak2 - I("U1", "U2,X2", "X1,U0,V0") - IM,
        I1 + I2 - leak1 - leak2 - I("U1", "U2", "X1,X2,U0,V0") - IM,
    ]


def corollary2_rows(I: InfoOracle) -> list[float]:
    t = I.terms
    I1, I2 = I("U0,V0", "Y1"), I("U0,V0", "Y2")
    I3 = I("U0", "Z1", "X1,V0")
    I1p, I3p = I("U1,X1", "Y1", "U0,V0"), I("U1", "Z1", "U0,V0,X1")
    IM = I("U3", "U4", "X1,U1,U0,V0")
    d1 = I("U3", "Y1", "U1,U0,X1,V0")
    # the second user's direct-link term, with its output read as Y2
    d2 = I("U4", "Y2", "U0,V0")
    leak = I("U0", "X1", "V0")
    relay = min(I1 + I1p, I3 + I3p)
    t.update(I_1=I1, I_2=I2, I_3=I3, I_1p=I1p, I_3p=I3p, I_M=IM)
    return [
        relay + d1,
        I("U0,V0,U4", "Y2") - leak,
        min(I2, I3) + I3p + d1 + d2 - leak - IM,
        min(I2, I1) + I1p + d1 + d2 - leak - IM,
        d1 + d2 + I2 + relay - leak - IM,
    ]


def marton_rows(I: InfoOracle) -> list[float]:
    priv = I("U1", "Y1", "U0") + I("U2", "Y2", "U0") - I("U1", "U2", "U0")
    return [
        I("U0,U1", "Y1"),
        I("U0,U2", "Y2"),
        I("U0", "Y1") + priv,
        I("U0", "Y2") + priv,
        I("U0,U1", "Y1") + I("U0,U2", "Y2") - I("U1", "U2", "U0"),
    ]


def theorem3_rows(I: InfoOracle) -> list[float]:
    return [
        I("U", "Y2"),
        min(I("X", "Z1", "X1,U"), I("X,X1", "Y1", "U")),
        min(I("X", "Z1", "X1"), I("X,X1", "Y1")),
    ]


def conjecture1_rows(I: InfoOracle) -> list[float]:
    common = I("U,V", "Y2")
    return [
        common,
        min(I("X", "Z1", "V,X1"), I("X,X1", "Y1")),
        min(I("X", "Z1", "X1,V,U"), I("X,X1", "Y1", "U,V")) + common,
    ]


def theorem4_rows(I: InfoOracle) -> list[float]:
    relay = min(I("U0,X1", "Y1"), I("Z1", "U0", "X1"))
    return [relay, relay + I("X", "Y2", "X1,U0")]


@dataclass(frozen=True)
class Formula:
    name: str
    labels: tuple[str, ...]          # rate coordinate names
    A: tuple                         # constraint matrix rows
    rows: Callable[[InfoOracle], list[float]]
    outer: bool = False

    @property
    def dim(self) -> int:
        return len(self.labels)


R3 = ("R0", "R1", "R2")
SUM_ROWS_3D = ((1, 1, 0), (1, 0, 1), (1, 1, 1), (1, 1, 1), (2, 1, 1))

THEOREM1 = Formula("theorem1", R3, SUM_ROWS_3D, theorem1_rows)
COROLLARY2 = Formula("corollary2", R3, SUM_ROWS_3D, corollary2_rows)
MARTON = Formula("marton", R3, SUM_ROWS_3D, marton_rows)
THEOREM3 = Formula("theorem3", ("R0", "R1"), ((1, 0), (0, 1), (1, 1)), theorem3_rows, outer=True)
CONJECTURE1 = Formula("conjecture1", ("R0", "R1"), ((1, 0), (1, 1), (1, 1)), conjecture1_rows)
THEOREM4 = Formula("theorem4", ("R0", "R1"), ((1, 0), (1, 1)), theorem4_rows)


# -- PD families ----------------------------------------------------------------

def theorem1_model(ch: Channel, spec: AuxSpec) -> PDModel:
    s = ch.sizes()
    aux = ["V0", "U0", "U1", "U2", "U3", "U4"]
    sizes = [spec.card(a) for a in aux] + [s["X1"], s["X2"], s["X"]]
    return PDModel(aux + ["X1", "X2", "X"], sizes, [
        Factor(("V0",)),
        Factor(("X1",), ("V0",)),
        Factor(("X2",), ("V0",)),
        Factor(("U0",), ("X1", "X2", "V0")),
        Factor(("U1", "U2"), ("U0", "X1", "X2")),
        Factor(("U3", "U4", "X"), ("U1", "U2")),
    ])


def corollary2_model(ch: Channel, spec: AuxSpec) -> PDModel:
    s = ch.sizes()
    aux = ["V0", "U0", "U1", "U3", "U4"]
    sizes = [spec.card(a) for a in aux] + [s["X1"], s["X"]]
    return PDModel(aux + ["X1", "X"], sizes, [
        Factor(("V0",)),
        Factor(("X1",), ("V0",)),
        Factor(("U0",), ("V0", "X1")),
        Factor(("U1",), ("V0", "X1", "U0")),
        Factor(("U3", "U4", "X"), ("V0", "X1", "U0", "U1")),
    ])


def marton_model(ch: Channel, spec: AuxSpec) -> PDModel:
    nx = ch.sizes()["X"]
    return PDModel(["U0", "U1", "U2", "X"],
                   [spec.card("U0"), spec.card("U1"), spec.card("U2"), nx], [
        Factor(("U0",)),
        Factor(("U1", "U2"), ("U0",)),
        Factor(("X",), ("U0", "U1", "U2")),
    ])


def theorem3_model(ch: Channel, spec: AuxSpec) -> PDModel:
    s = ch.sizes()
    return PDModel(["U", "X1", "X"], [spec.card("U"), s["X1"], s["X"]], [
        Factor(("U",)), Factor(("X1",), ("U",)), Factor(("X",), ("U", "X1"))])


def conjecture1_model(ch: Channel, spec: AuxSpec) -> PDModel:
    s = ch.sizes()
    return PDModel(["V", "U", "X1", "X"], [spec.card("V"), spec.card("U"), s["X1"], s["X"]], [
        Factor(("V",)), Factor(("U",), ("V",)), Factor(("X1",), ("V", "U")),
        Factor(("X",), ("V", "U", "X1"))])


def theorem4_model(ch: Channel, spec: AuxSpec) -> PDModel:
    s = ch.sizes()
    return PDModel(["U0", "X1", "X"], [spec.card("U0"), s["X1"], s["X"]], [
        Factor(("U0",)), Factor(("X1",), ("U0",)), Factor(("X",), ("U0", "X1"))])


# -- embeddings into the general inner bound -------------------------------

THEOREM1_VARS = ("V0", "U0", "U1", "U2", "U3", "U4", "X1", "X2", "X")


def embed_marton(pd: DiscretePMF) -> DiscretePMF:
    """Marton PD on (U0, U1, U2, X) as a general-inner-bound PD.

    Relay inputs, V0, U3 and U4 are constants, and U1, U2 absorb U0 so the
    input depends on (U1, U2) only, as the general factorization requires.
    """
    p = pd.float_probs()
    n0, n1, n2, nx = pd.sizes
    out = np.zeros((1, n0, n0 * n1, n0 * n2, 1, 1, 1, 1, nx))
    for u0, u1, u2 in np.ndindex(n0, n1, n2):
        out[0, u0, u0 * n1 + u1, u0 * n2 + u2, 0, 0, 0, 0, :] = p[u0, u1, u2, :]
    return DiscretePMF(THEOREM1_VARS, out.shape, out)


def embed_semi_degraded(pd: DiscretePMF) -> DiscretePMF:
    """PD on (U0, X1, X) with X1 = X2 = V0, U1 = U2 = U3 constant and U4 = X."""
    p = pd.float_probs()
    n0, n1, nx = pd.sizes
    out = np.zeros((n1, n0, 1, 1, 1, nx, n1, n1, nx))
    for u0, x1, x in np.ndindex(n0, n1, nx):
        out[x1, u0, 0, 0, 0, x, x1, x1, x] = p[u0, x1, x]
    return DiscretePMF(THEOREM1_VARS, out.shape, out)


def theorem3_pds_from_conjecture(pd: DiscretePMF) -> list[DiscretePMF]:
    """Images of a (V, U, X1, X) PD in the (U, X1, X) family.

    One merges (U, V) into a single auxiliary, the other drops it.
    """
    p = pd.float_probs()
    nv, nu, n1, nx = pd.sizes
    merged = p.reshape(nv * nu, n1, nx)
    dropped = p.sum(axis=(0, 1)).reshape(1, n1, nx)
    names = ("U", "X1", "X")
    return [DiscretePMF(names, merged.shape, merged), DiscretePMF(names, dropped.shape, dropped)]


# -- report -----------------------------------------------------------------

@dataclass(frozen=True)
class VertexWitness:
    vertex: np.ndarray
    pd: DiscretePMF
    terms: dict
    rhs: tuple


@dataclass(frozen=True)
class RegionEvalReport:
    formula: str
    labels: tuple[str, ...]
    region: RateRegion
    witnesses: tuple[VertexWitness, ...]
    n_evaluated: int
    flags: tuple[str, ...] = ()
    channel: Channel | None = field(default=None, repr=False)

    def reproduce(self, i: int) -> np.ndarray:
        """Recompute the witness polytope of vertex ``i`` and return the vertex."""
        w = self.witnesses[i]
        formula = FORMULAS[self.formula]
        _, b, V = _evaluate_pd(formula, self.channel, w.pd)
        return _match_vertex(w.vertex, V)


FORMULAS = {f.name: f for f in (THEOREM1, COROLLARY2, MARTON, THEOREM3, CONJECTURE1, THEOREM4)}
_FAMILIES: dict = {}


def _evaluate_pd(formula: Formula, ch: Channel, pd: DiscretePMF):
    joint = induced_joint(ch, pd)
    oracle = InfoOracle(joint)
    b = np.asarray(formula.rows(oracle), dtype=float)
    fam = _FAMILIES.get(formula.name)
    if fam is None:
        fam = _FAMILIES[formula.name] = PolytopeFamily(formula.A)
    # a negative right-hand side is clamped; the PD still contributes {0}
    V = fam.vertices(np.maximum(b, 0.0))
    return oracle.terms, b, V


def _match_vertex(v: np.ndarray, V: np.ndarray) -> np.ndarray:
    """The (possibly projected) polytope vertex equal to ``v``, else NaNs."""
    pos = v > 1e-12
    cand = V * pos
    d = np.max(np.abs(cand - v), axis=1)
    i = int(np.argmin(d))
    return cand[i] if d[i] <= REPRO_TOL else np.full_like(v, np.nan)


def workers_from_env(default: int = 1) -> int:
    """Worker cap from BRC_THREADS, or ``default`` when unset."""
    cap = os.environ.get("BRC_THREADS")
    if cap:
        try:
            return max(1, int(cap))
        except ValueError:
            pass
    return default


def _support_value(V: np.ndarray, w: np.ndarray) -> float:
    return round(float(np.max(V @ w)), 12) if len(V) else 0.0


def _resolve_workers(workers: int | None) -> int:
    cap = workers_from_env(0)
    if workers is None:
        return cap or 1
    return min(max(1, workers), cap) if cap else max(1, workers)


def _pmap(fn, items, workers: int) -> list:
    # ex.map preserves input order, so the reduction order is fixed
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def explore(formula: Formula, ch: Channel, model: PDModel, spec: AuxSpec,
            transform: Callable[[DiscretePMF], DiscretePMF] | None = None,
            workers: int | None = None) -> list[tuple]:
    """Sample and refine PDs; returns ``(pd, terms, rhs, vertices)`` per PD.

    Sample ``i`` depends only on ``(seed, i)`` and refinement only touches
    complete blocks, so a larger budget explores a superset of PDs.
    """
    workers = _resolve_workers(workers)
    transform = transform or (lambda pd: pd)

    def run(params):
        pd = transform(model.pmf(params))
        terms, b, V = _evaluate_pd(formula, ch, pd)
        return pd, terms, b, V

    params = [model.sample(sample_rng(spec.seed, i), spec.strata[i % len(spec.strata)])
              for i in range(spec.samples)]
    results = _pmap(run, params, workers)

    directions = sweep_directions(formula.dim, 9 if formula.dim == 2 else None)
    n_blocks = spec.samples // spec.block if spec.refine_steps else 0

    def refine(job):
        blk, k = job
        w = directions[k]
        lo = blk * spec.block
        scores = [_support_value(r[3], w) for r in results[lo:lo + spec.block]]
        best = int(np.argmax(scores))
        cur, cur_score = params[lo + best], scores[best]
        rng = refine_rng(spec.seed, blk, k)
        found = None
        for step in range(spec.refine_steps):
            trial = model.perturb(cur, step % len(model.factors), rng, 0.6 * 0.75 ** step)
            res = run(trial)
            s = _support_value(res[3], w)
            if s > cur_score + 1e-12:
                cur, cur_score, found = trial, s, res
        return found

    jobs = [(blk, k) for blk in range(n_blocks) for k in range(len(directions))]
    refined = [r for r in _pmap(refine, jobs, workers) if r is not None]
    return results + refined


def evaluate_pds(formula: Formula, ch: Channel, pds: Sequence[DiscretePMF],
                 workers: int | None = None) -> list[tuple]:
    def run(pd):
        terms, b, V = _evaluate_pd(formula, ch, pd)
        return pd, terms, b, V
    return _pmap(run, list(pds), _resolve_workers(workers))


def assemble(formula: Formula, ch: Channel, results: Sequence[tuple],
             flags: Sequence[str] = ()) -> RegionEvalReport:
    """Hull the per-PD polytopes and attach a witness PD to every vertex."""
    pts, owner = [], []
    for i, r in enumerate(results):
        pts.append(r[3])
        owner.extend([i] * len(r[3]))
    P = np.vstack(pts)
    owner = np.asarray(owner)
    region = hull_of(P)

    witnesses = []
    for v in region.vertices:
        pos = v > 1e-12
        d = np.max(np.abs(P * pos - v), axis=1)
        pd, terms, b, _ = results[int(owner[int(np.argmin(d))])]
        witnesses.append(VertexWitness(v, pd, dict(terms), tuple(float(x) for x in b)))
    flags = list(flags)
    if formula.outer:
        flags.append("sampled outer bound: under-approximates the stated region")
    return RegionEvalReport(formula.name, formula.labels, region, tuple(witnesses),
                            len(results), tuple(flags), ch)


def search_region(formula: Formula, ch: Channel, model: PDModel, spec: AuxSpec,
                  extra_pds: Sequence[DiscretePMF] = (), workers: int | None = None,
                  flags: Sequence[str] = ()) -> RegionEvalReport:
    results = explore(formula, ch, model, spec, workers=workers)
    if extra_pds:
        results = results + evaluate_pds(formula, ch, extra_pds, workers)
    return assemble(formula, ch, results, flags)


# -- public evaluators ---------------------------------------------------------

def _need(ch, cls, what):
    if not isinstance(ch, cls):
        raise BoundsError(f"{what} needs a {cls.__name__}, got {type(ch).__name__}")


def eval_theorem1(ch: BrcChannel, spec: AuxSpec, workers: int | None = None,
                  extra_pds: Sequence[DiscretePMF] = ()) -> RegionEvalReport:
    """General inner bound for the two-relay BRC."""
    _need(ch, BrcChannel, "eval_theorem1")
    return search_region(THEOREM1, ch, theorem1_model(ch, spec), spec,
                         extra_pds=extra_pds, workers=workers)


def theorem1_terms(ch: BrcChannel, pd: DiscretePMF) -> tuple[dict, np.ndarray]:
    """Information terms and rate-bound right-hand sides at a single PD."""
    terms, b, _ = _evaluate_pd(THEOREM1, ch, pd)
    return terms, b


def eval_marton(ch: Channel, spec: AuxSpec, workers: int | None = None) -> RegionEvalReport:
    bc = broadcast_part(ch)
    return search_region(MARTON, bc, marton_model(bc, spec), spec, workers=workers)


def eval_corollary2(ch: BrcCrChannel, spec: AuxSpec, workers: int | None = None,
                    extra_pds: Sequence[DiscretePMF] = ()) -> RegionEvalReport:
    _need(ch, BrcCrChannel, "eval_corollary2")
    return search_region(COROLLARY2, ch, corollary2_model(ch, spec), spec,
                         extra_pds=extra_pds, workers=workers,
                         flags=["second user's direct-link output read as Y2"])


def _class_flag(ch: BrcCrChannel, want: str) -> list[str]:
    cls = classify_brc_cr(ch)
    ok = cls.is_degraded if want == "Degraded" else cls.is_semi_degraded
    if ok:
        return []
    log.warning("channel classifies as %s, not %s; evaluating anyway", cls.kind, want)
    return [f"channel is {cls.kind}, not {want}"]


def eval_theorem3_upper(ch: BrcCrChannel, spec: AuxSpec, workers: int | None = None,
                        extra_pds: Sequence[DiscretePMF] = (),
                        include_conjecture_pds: bool = True) -> RegionEvalReport:
    """Degraded-channel outer bound over PDs on (U, X1, X).

    With ``include_conjecture_pds`` the PDs explored by eval_conjecture1
    under the same spec are mapped into this family (U := (U, V), and U
    constant) and evaluated too, so the two regions share a matched grid.
    """
    _need(ch, BrcCrChannel, "eval_theorem3_upper")
    extra = list(extra_pds)
    if include_conjecture_pds:
        ref = explore(CONJECTURE1, ch, conjecture1_model(ch, spec), spec, workers=workers)
        for r in ref:
            extra.extend(theorem3_pds_from_conjecture(r[0]))
    return search_region(THEOREM3, ch, theorem3_model(ch, spec), spec, extra_pds=extra,
                         workers=workers, flags=_class_flag(ch, "Degraded"))


def eval_conjecture1(ch: BrcCrChannel, spec: AuxSpec, workers: int | None = None,
                     extra_pds: Sequence[DiscretePMF] = ()) -> RegionEvalReport:
    _need(ch, BrcCrChannel, "eval_conjecture1")
    return search_region(CONJECTURE1, ch, conjecture1_model(ch, spec), spec,
                         extra_pds=extra_pds, workers=workers)


def eval_theorem4(ch: BrcCrChannel, spec: AuxSpec, workers: int | None = None,
                  extra_pds: Sequence[DiscretePMF] = ()) -> RegionEvalReport:
    _need(ch, BrcCrChannel, "eval_theorem4")
    return search_region(THEOREM4, ch, theorem4_model(ch, spec), spec, extra_pds=extra_pds,
                         workers=workers, flags=_class_flag(ch, "SemiDegraded"))


def specialize_theorem1(ch: Channel, mode: str, spec: AuxSpec,
                        workers: int | None = None) -> RegionEvalReport:
    """General inner bound restricted to a sub-family, on the sub-family's grid.

    The reference evaluator's search is replayed and every PD it explored is
    embedded and re-evaluated with the general formula, so both regions rest
    on the same PDs.

    ``marton``: relays silenced, Z_b = Y_b, reference eval_marton.
    ``semi_degraded_cr``: X1 = X2 = V0, Z2 = Z1, U1 = U2 = U3 constant and
    U4 = X; reference eval_theorem4.
    """
    if mode == "marton":
        bc = broadcast_part(ch)
        ref = explore(MARTON, bc, marton_model(bc, spec), spec, workers=workers)
        pds = [embed_marton(r[0]) for r in ref]
        target = silence_relays(bc)
    elif mode == "semi_degraded_cr":
        _need(ch, BrcCrChannel, "semi_degraded_cr specialization")
        ref = explore(THEOREM4, ch, theorem4_model(ch, spec), spec, workers=workers)
        pds = [embed_semi_degraded(r[0]) for r in ref]
        target = tie_relays(ch)
    else:
        raise BoundsError(f"unknown specialization {mode!r}")
    results = evaluate_pds(THEOREM1, target, pds, workers)
    return assemble(THEOREM1, target, results, [f"specialized: {mode}"])


EVALUATORS = {
    "1": eval_theorem1,
    "cor2": eval_corollary2,
    "3": eval_theorem3_upper,
    "conj1": eval_conjecture1,
    "4": eval_theorem4,
    "marton": eval_marton,
}
