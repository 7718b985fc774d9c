"""Mechanical re-derivation of the general BRC inner bound.

The coding constraints (binning, relay decoding, destination decoding) are
written over the auxiliary rates T0..T4, bin rates S01, S02, S1..S4 and the
message rates R0, R1, R2. Eliminating every T and S symbol must reproduce
the five rate inequalities of the inner bound (each min{} expanded) plus
rate non-negativity.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .expr import (ConstraintSystem, EntropyForm, I, IdentityReducer, InfoExpr, InfoTerm,
                   LinearInfoInequality, as_form, canonical_key, canonicalize)
from .fme import Elimination, EliminationStep, fm_eliminate

ELIMINATION_ORDER = ("T3", "T4", "S3", "S4", "T1", "T2", "S1", "S2", "T0", "S01", "S02")
RATES = ("R0", "R1", "R2")


def _other(b: int) -> int:
    return 3 - b


def _le(coeffs: dict, rhs, label: str) -> LinearInfoInequality:
    return LinearInfoInequality(coeffs, rhs, "<=", label)


def _ge(coeffs: dict, rhs, label: str) -> LinearInfoInequality:
    return LinearInfoInequality(coeffs, rhs, ">=", label)


def load_identities(path: str | Path | None = None) -> list[tuple[str, InfoTerm]]:
    if path is None:
        text = resources.files(__package__).joinpath("data/identities.json").read_text()
    else:
        text = Path(path).read_text()
    data = json.loads(text)
    return [(d["name"], InfoTerm(frozenset(d["A"]), frozenset(d["B"]), frozenset(d.get("C", ()))))
            for d in data["identities"]]


def default_reducer() -> IdentityReducer:
    return IdentityReducer([t for _, t in load_identities()])


# -- the coding constraints ---------------------------------------------------

def build_theorem1_system(identities: Sequence[InfoTerm] | None = None) -> ConstraintSystem:
    """Binning, decoding and rate-split constraints for b = 1, 2.

    Strict decoding inequalities are closed to ``<=``.
    """
    rows: list[LinearInfoInequality] = []
    rows.append(_ge({"T0": 1, "R0": -1, "S01": -1, "S02": -1},
                    I("U0", "X1,X2", "V0"), "bin-common"))
    for b in (1, 2):
        o = _other(b)
        rows.append(_ge({f"T{b}": 1, f"S{b}": -1},
                        I(f"U{b}", f"X{o}", f"X{b},U0,V0"), f"bin-private.{b}"))
    rows.append(_ge({"T1": 1, "T2": 1, "S1": -1, "S2": -1},
                    I("U1", "X2", "X1,U0,V0") + I("U2", "X1", "X2,U0,V0")
                    + I("U2", "U1", "X1,X2,U0,V0"), "bin-private.joint"))
    rows.append(_ge({"T3": 1, "T4": 1, "S3": -1, "S4": -1},
                    I("U3", "U4", "U1,U2,X1,X2,U0,V0"), "cover-direct"))
    for b in (1, 2):
        u, ub, x, z, y = f"U{b + 2}", f"U{b}", f"X{b}", f"Z{b}", f"Y{b}"
        rows.append(_le({f"T{b}": 1}, I(ub, z, f"U0,V0,{x}"), f"relay-dec.{b}"))
        rows.append(_le({f"T{b}": 1, "T0": 1},
                        I(ub, z, f"U0,V0,{x}") + I("U0", f"{z},{x}", "V0"),
                        f"relay-dec-common.{b}"))
        rows.append(_le({f"T{b + 2}": 1}, I(u, y, f"U0,V0,{x},{ub}"), f"dest-dec.{b}"))
        rows.append(_le({f"T{b + 2}": 1, f"T{b}": 1}, I(f"{u},{ub},{x}", y, "U0,V0"),
                        f"dest-dec-private.{b}"))
        rows.append(_le({f"T{b + 2}": 1, f"T{b}": 1, "T0": 1},
                        I("V0,U0", y) + I(x, f"{y},U0", "V0") + I(f"{u},{ub}", y, f"U0,V0,{x}"),
                        f"dest-dec-all.{b}"))
    for b in (1, 2):
        rows.append(LinearInfoInequality({f"R{b}": 1, f"S{b + 2}": -1, f"S{b}": -1, f"S0{b}": -1},
                                         0, "=", f"split.{b}"))
    for j in (1, 2, 3, 4):
        rows.append(_ge({f"T{j}": 1, f"S{j}": -1}, 0, f"T>=S.{j}"))
    for s in ("S01", "S02", "S1", "S2", "S3", "S4"):
        rows.append(_ge({s: 1}, 0, f"S>=0.{s}"))
    for r in RATES:
        rows.append(_ge({r: 1}, 0, f"R>=0.{r}"))
    if identities is None:
        identities = [t for _, t in load_identities()]
    return ConstraintSystem(rows, [t.form() for t in identities])


# -- the inner bound as stated ------------------------------------------------

def _branches(b: int) -> dict[str, list[tuple[str, InfoExpr]]]:
    u, ub, x, z, y = f"U{b + 2}", f"U{b}", f"X{b}", f"Z{b}", f"Y{b}"
    direct = I(u, y, f"U0,V0,{x},{ub}")
    return {
        "I": [("relay", I(f"U0,{ub}", z, f"V0,{x}") + direct),
              ("direct", I(f"U0,V0,{ub},{u},{x}", y))],
        "J": [("relay", I(ub, z, f"U0,V0,{x}") + direct),
              ("direct", I(f"{u},{ub},{x}", y, "U0,V0"))],
    }


I_M = I("U3", "U4", "U1,U2,X1,X2,U0,V0")


def theorem1_target() -> list[LinearInfoInequality]:
    """The inner-bound rows with every min{} expanded, plus R >= 0."""
    B = {1: _branches(1), 2: _branches(2)}
    bin1 = I("U0,U1", "X2", "X1,V0")
    bin2 = I("U0,U2", "X1", "X2,V0")
    rows = []
    for n1, i1 in B[1]["I"]:
        rows.append(_le({"R0": 1, "R1": 1}, i1 - bin1, f"R0+R1[I1:{n1}]"))
    for n2, i2 in B[2]["I"]:
        rows.append(_le({"R0": 1, "R2": 1}, i2 - bin2, f"R0+R2[I2:{n2}]"))
    for (n1, i1), (n2, j2) in itertools.product(B[1]["I"], B[2]["J"]):
        rows.append(_le({"R0": 1, "R1": 1, "R2": 1},
                        i1 + j2 - bin1 - I("U1,X1", "U2", "X2,U0,V0") - I_M,
                        f"R0+R1+R2[I1:{n1},J2:{n2}]"))
    for (n1, j1), (n2, i2) in itertools.product(B[1]["J"], B[2]["I"]):
        rows.append(_le({"R0": 1, "R1": 1, "R2": 1},
                        j1 + i2 - bin2 - I("U1", "U2,X2", "X1,U0,V0") - I_M,
                        f"R0+R1+R2[J1:{n1},I2:{n2}]"))
    for (n1, i1), (n2, i2) in itertools.product(B[1]["I"], B[2]["I"]):
        rows.append(_le({"R0": 2, "R1": 1, "R2": 1},
                        i1 + i2 - bin1 - bin2 - I("U1", "U2", "X1,X2,U0,V0") - I_M,
                        f"2R0+R1+R2[I1:{n1},I2:{n2}]"))
    for r in RATES:
        rows.append(_ge({r: 1}, 0, f"{r}>=0"))
    return rows


# -- the two in-text simplifications -------------------------------------------

@dataclass
class Simplification:
    name: str
    combined: LinearInfoInequality
    expected: InfoExpr
    difference: EntropyForm

    @property
    def holds(self) -> bool:
        return self.difference.is_zero()


def binning_simplifications(reducer: IdentityReducer | None = None) -> list[Simplification]:
    """Relay decoding and destination decoding bounds after using the binning row.

    The binning constraint on T0 carries I(U0;X1,X2|V0) = I(U0;Xb|V0) +
    I(U0;X_other|Xb,V0); adding the first part to the relay (resp.
    destination) decoding row cancels it against the (U0, Xb) term.
    """
    reducer = reducer or IdentityReducer()
    sys = {r.label: r for r in build_theorem1_system().rows}
    out = []
    for b in (1, 2):
        x, z, y = f"X{b}", f"Z{b}", f"Y{b}"
        share = I("U0", x, "V0")
        r4 = sys[f"relay-dec-common.{b}"]
        comb = LinearInfoInequality(r4.coeffs, r4.rhs - share, "<=",
                                    f"relay-dec-common.{b}+bin-common")
        want = I(f"U0,U{b}", z, f"V0,{x}")
        out.append(Simplification(comb.label, comb, want, reducer.reduce(comb.rhs - want)))
        r6 = sys[f"dest-dec-all.{b}"]
        comb = LinearInfoInequality(r6.coeffs, r6.rhs - share, "<=", f"dest-dec-all.{b}+bin-common")
        want = I(f"U{b + 2},U{b},{x},V0,U0", y)
        out.append(Simplification(comb.label, comb, want, reducer.reduce(comb.rhs - want)))
    return out


# -- derivation and comparison --------------------------------------------------

@dataclass
class Match:
    target: LinearInfoInequality
    derived: LinearInfoInequality


@dataclass
class MissingRow:
    target: LinearInfoInequality
    nearest: LinearInfoInequality | None = None
    difference: EntropyForm | None = None
    named: list = field(default_factory=list)   # catalogue terms equal to +-difference

    def describe(self) -> str:
        s = f"{self.target.label}: {self.target}"
        if self.named:
            s += "\n    derived row differs by " + ", ".join(self.named)
        elif self.difference is not None:
            s += f"\n    nearest derived row differs by {self.difference}"
        return s


@dataclass
class DerivationReport:
    matched: list
    missing: list
    extra_rate_rows: list
    feasibility_rows: list
    steps: list
    seconds: float
    dropped: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.missing

    def summary(self, timing: bool = True) -> str:
        head = (f"{'PASS' if self.passed else 'FAIL'}: {len(self.matched)} target rows matched, "
                f"{len(self.missing)} missing, {len(self.extra_rate_rows)} extra rate rows, "
                f"{len(self.feasibility_rows)} rate-free rows")
        lines = [head + (f" ({self.seconds:.2f} s)" if timing else "")]
        if self.dropped:
            lines.append("dropped constraints: " + ", ".join(self.dropped))
        for m in self.missing:
            lines.append("missing " + m.describe())
        return "\n".join(lines)

    def text(self, timing: bool = False) -> str:
        out = [self.summary(timing), "", "matched:"]
        for m in self.matched:
            out.append(f"  {m.target.label:<28} {m.derived.lhs_str()} <= {_history_str(m.derived)}")
        out.append("extra rate rows (not in the stated bound):")
        for r in self.extra_rate_rows:
            out.append(f"  {r}   [{_history_str(r)}]")
        out.append("rate-free rows (conditions on the PD):")
        for r in self.feasibility_rows:
            out.append(f"  {r}   [{_history_str(r)}]")
        return "\n".join(out)


_LABELS: list[str] = []


def _history_str(r: LinearInfoInequality) -> str:
    if not _LABELS:
        return ""
    return " + ".join(sorted(_LABELS[i] for i in r.history))


def term_catalogue(sys: ConstraintSystem) -> list[InfoTerm]:
    seen = {}
    for r in sys.rows + theorem1_target():
        if isinstance(r.rhs, InfoExpr):
            for t in r.rhs.terms:
                seen[t] = None
    return list(seen)


def derive(system: ConstraintSystem | None = None,
           order: Sequence[str] = ELIMINATION_ORDER,
           on_step=None) -> Elimination:
    system = system or build_theorem1_system()
    return fm_eliminate(system, list(order), on_step=on_step)


def derive_and_compare(drop: Iterable[str] = (), order: Sequence[str] = ELIMINATION_ORDER,
                       permute_seed: int | None = None, on_step=None) -> DerivationReport:
    """Eliminate all T/S symbols and compare with the stated inner bound.

    ``drop`` removes constraint families by label (e.g. ``"cover-direct"``) for
    ablations; ``permute_seed`` shuffles the input rows first.
    """
    t0 = time.perf_counter()
    system = build_theorem1_system()
    dropped = tuple(drop)
    if dropped:
        system = system.without(dropped)
    if permute_seed is not None:
        perm = np.random.default_rng(permute_seed).permutation(len(system.rows))
        system = ConstraintSystem([system.rows[i] for i in perm], system.equalities)
    _LABELS[:] = [r.label for r in system.rows]
    elim = derive(system, order, on_step)
    reducer = IdentityReducer(system.equalities)

    derived = [r for r in elim.system.rows]
    dkeys = {}
    for r in derived:
        dkeys.setdefault(canonical_key(r, reducer), r)

    matched, missing = [], []
    catalogue = term_catalogue(system)
    for t in theorem1_target():
        k = canonical_key(t, reducer)
        if k in dkeys:
            matched.append(Match(t, dkeys[k]))
        else:
            missing.append(_explain_missing(t, derived, reducer, catalogue))

    hit = {id(m.derived) for m in matched}
    extra = [r for r in derived if id(r) not in hit and r.coeffs]
    feas = [r for r in derived if not r.coeffs]
    return DerivationReport(matched, missing, extra, feas, elim.steps,
                            time.perf_counter() - t0, dropped)


def _explain_missing(t, derived, reducer, catalogue) -> MissingRow:
    tc = canonicalize(t, reducer=reducer)
    same = [r for r in derived if canonicalize(r, reducer=reducer).coeffs == tc.coeffs]
    if not same:
        return MissingRow(t)
    best, best_diff, best_size = None, None, None
    for r in same:
        d = reducer.reduce(canonicalize(r, reducer=reducer).rhs - tc.rhs)
        size = len(d.coeffs)
        if best is None or size < best_size:
            best, best_diff, best_size = r, d, size
    named = []
    for term in catalogue:
        f = reducer.reduce(term.form())
        if f.is_zero():
            continue
        if (best_diff - f).is_zero():
            named.append(f"+{term}")
        elif (best_diff + f).is_zero():
            named.append(f"-{term}")
    return MissingRow(t, best, best_diff, named)


def dump_steps(report: DerivationReport, directory: str | Path) -> list[Path]:
    """Write each elimination stage as a text table, one row per line."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, st in enumerate(report.steps, 1):
        p = d / f"step{i:02d}_{st.var}.txt"
        lines = [f"# eliminate {st.var} by {st.method}: {st.n_pos} upper x {st.n_neg} lower "
                 f"-> {st.n_rows} rows"]
        lines += [str(r) for r in st.rows]
        p.write_text("\n".join(lines) + "\n")
        paths.append(p)
    p = d / "report.txt"
    p.write_text(report.text() + "\n")
    paths.append(p)
    return paths


# -- numeric instantiation --------------------------------------------------------

def _random_brc(rng: np.random.Generator, concentration: float):
    from ..channels import BrcChannel
    law = rng.dirichlet(np.full(16, concentration), size=8).reshape((2,) * 7)
    return BrcChannel(("X", "X1", "X2"), (2, 2, 2), ("Y1", "Z1", "Y2", "Z2"), (2, 2, 2, 2), law)


def random_theorem1_joint(seed: int = 0xB12C, structured: bool = False, eps: float = 0.05):
    """A random PD of the required factorization pushed through a random binary BRC.

    Fully random tables make every binning penalty large and the stated
    region empty. ``structured`` instead blends (weight ``1 - eps``) a PD
    with independent uniform auxiliaries and X a random function of
    (U1..U4) with random tables, and uses a nearly deterministic channel;
    most such PDs give a non-empty region.
    """
    from ..bounds import theorem1_model
    from ..channels import induced_joint
    from ..sampling import AuxSpec

    rng = np.random.default_rng(seed)
    ch = _random_brc(rng, 0.05 if structured else 1.0)
    model = theorem1_model(ch, AuxSpec())
    if not structured:
        return induced_joint(ch, model.pmf(model.sample(rng, 1.0)))
    params = []
    for f in model.factors:
        r, c = model.factor_shape(f)
        if f.vars == ("U3", "U4", "X"):
            W = np.zeros((r, 4, 2))
            W[np.arange(r)[:, None], np.arange(4)[None, :], rng.integers(2, size=(r, 4))] = 0.25
            W = W.reshape(r, c)
        else:
            W = np.full((r, c), 1.0 / c)
        params.append((1 - eps) * W + eps * rng.dirichlet(np.ones(c), size=r))
    return induced_joint(ch, model.pmf(params))


def numeric_crosscheck(report: DerivationReport, joint=None, tol: float = 1e-9) -> float:
    """Largest |derived - target| over matched rows on a factorized PD.

    The rows are evaluated from their uncanonicalized information terms, so
    this also checks that the shipped identities hold on such PDs.
    """
    joint = joint if joint is not None else random_theorem1_joint()
    worst = 0.0
    for m in report.matched:
        a = _value(m.target, joint)
        b = _value(m.derived, joint)
        worst = max(worst, abs(a - b))
    return worst


def _value(r: LinearInfoInequality, joint) -> float:
    r = r.normalized()
    rhs = r.rhs
    if isinstance(rhs, (int, Fraction)):
        return float(rhs)
    return as_form(rhs).evaluate(joint)


@dataclass
class ExtraRowAudit:
    row: LinearInfoInequality
    cuts: int          # PDs on which the row removes part of the stated region
    worst: float       # largest (max over stated region of a.R) - rhs
    n_pds: int         # PDs with a non-empty stated region


def audit_extra_rows(report: DerivationReport, n_pds: int = 8, seed: int = 0xB12C,
                     tol: float = 1e-9) -> list[ExtraRowAudit]:
    """Check each extra derived row against the stated region on random PDs.

    A row that never cuts is numerically redundant on the sample; one that
    cuts shows the stated bound omits a constraint implied by the coding
    constraints. Rate-free rows are audited as plain sign conditions.
    """
    from ..regions import PolytopeFamily

    targets = [t for t in theorem1_target() if t.coeffs and any(v > 0 for v in t.coeffs.values())]
    A = np.array([[float(t.coef(r)) for r in RATES] for t in targets])
    fam = PolytopeFamily(A)
    joints = [random_theorem1_joint(seed + k, structured=True) for k in range(n_pds)]
    vert = []
    for j in joints:
        b = np.array([_value(t, j) for t in targets])
        vert.append(fam.vertices(np.maximum(b, 0.0)) if np.all(b >= -tol) else np.zeros((0, 3)))
    out = []
    n_live = sum(len(V) > 0 for V in vert)
    for r in report.extra_rate_rows + report.feasibility_rows:
        a = np.array([float(r.coef(s)) for s in RATES])
        cuts, worst = 0, -np.inf
        for j, V in zip(joints, vert):
            if not len(V):
                continue
            gap = float(np.max(V @ a)) - as_form(r.rhs).evaluate(j)
            worst = max(worst, gap)
            cuts += gap > tol
        out.append(ExtraRowAudit(r, cuts, worst, n_live))
    return out
