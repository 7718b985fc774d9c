"""Exact Fourier-Motzkin elimination with Chernikov redundancy pruning.

Rows are ``LinearInfoInequality`` objects; the right-hand side may be
symbolic (an information expression) or a plain Fraction. Every row keeps
the set of original rows it was combined from. A new row whose history
strictly contains another row's history corresponds to a non-extreme
multiplier vector and is dropped; this test never looks at the rhs, so it
is exact for symbolic systems too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .expr import ConstraintSystem, LinearInfoInequality, as_form


def _combine(p: LinearInfoInequality, n: LinearInfoInequality, var: str) -> LinearInfoInequality:
    a, b = p.coef(var), -n.coef(var)  # both > 0
    coeffs = {}
    for s in p.symbols() | n.symbols():
        if s == var:
            continue
        v = b * p.coef(s) + a * n.coef(s)
        if v:
            coeffs[s] = v
    return LinearInfoInequality(coeffs, p.rhs * b + n.rhs * a, "<=", "",
                                p.history | n.history).normalized()


def _substitute(row: LinearInfoInequality, eq: LinearInfoInequality, var: str):
    k = row.coef(var)
    if not k:
        return row
    e = eq.coef(var)
    coeffs = {}
    for s in row.symbols() | eq.symbols():
        if s == var:
            continue
        v = row.coef(s) - k / e * eq.coef(s)
        if v:
            coeffs[s] = v
    rhs = row.rhs - eq.rhs * (k / e)
    return LinearInfoInequality(coeffs, rhs, row.relation, row.label, row.history)


def _prune_histories(rows: list) -> list:
    """Drop rows whose history strictly contains another's; dedupe equal ones."""
    rows = sorted(rows, key=lambda r: len(r.history))
    kept: list = []
    seen = set()
    for r in rows:
        h = r.history
        if h in seen:
            continue
        if any(k.history < h for k in kept):
            continue
        kept.append(r)
        seen.add(h)
    return kept


def _is_numeric(x) -> bool:
    return isinstance(x, (int, Fraction))


def _drop_trivial(rows: list) -> tuple[list, bool]:
    """Remove ``0 <= c`` with numeric c >= 0; report infeasibility if c < 0."""
    out, infeasible = [], False
    for r in rows:
        if not r.coeffs:
            if _is_numeric(r.rhs):
                if r.rhs < 0:
                    infeasible = True
                continue
            if as_form(r.rhs).is_zero():
                continue
        out.append(r)
    return out, infeasible


def _dominance(rows: list) -> list:
    """Among numeric rows with identical left sides keep the tightest."""
    best: dict = {}
    order = []
    for r in rows:
        key = tuple(r.coeffs.items())
        if not _is_numeric(r.rhs):
            order.append(r)
            continue
        if key not in best:
            best[key] = r
            order.append(key)
        elif r.rhs < best[key].rhs:
            best[key] = r
    return [best[x] if isinstance(x, tuple) else x for x in order]


@dataclass
class EliminationStep:
    var: str
    method: str              # "substitution" or "fourier-motzkin"
    n_pos: int
    n_neg: int
    n_rows: int
    rows: list = field(repr=False, default_factory=list)


@dataclass
class Elimination:
    system: ConstraintSystem
    steps: list
    infeasible: bool = False


def fm_eliminate(sys: ConstraintSystem, vars: Sequence[str],
                 on_step: Callable[[EliminationStep], None] | None = None,
                 chernikov: bool = True) -> Elimination:
    """Project ``sys`` onto the symbols not in ``vars``, in the given order.

    Equality rows are used for substitution when they contain the variable
    being eliminated; otherwise the variable is removed by pairing every
    upper bound with every lower bound.
    """
    ineqs, eqs = [], []
    for i, r in enumerate(sys.rows):
        if r.relation == "=":
            eqs.append(r)
        else:
            # singleton history: index into the original row list
            ineqs.append(LinearInfoInequality(r.coeffs, r.rhs, "<=", r.label, frozenset([i])))
    steps = []
    infeasible = False
    for var in vars:
        eq = next((e for e in eqs if e.coef(var)), None)
        if eq is not None:
            eqs = [_substitute(e, eq, var) for e in eqs if e is not eq]
            ineqs = [_substitute(r, eq, var).normalized() for r in ineqs]
            step = EliminationStep(var, "substitution", 0, 0, len(ineqs))
        else:
            pos = [r for r in ineqs if r.coef(var) > 0]
            neg = [r for r in ineqs if r.coef(var) < 0]
            zero = [r for r in ineqs if not r.coef(var)]
            new = [_combine(p, n, var) for p in pos for n in neg]
            if chernikov:
                new = _prune_histories(zero + new)
            else:
                new = zero + new
            ineqs = new
            step = EliminationStep(var, "fourier-motzkin", len(pos), len(neg), len(ineqs))
        ineqs, bad = _drop_trivial(ineqs)
        ineqs = _dominance(ineqs)
        infeasible |= bad
        step.rows = list(ineqs)
        steps.append(step)
        if on_step:
            on_step(step)
    out = ConstraintSystem(list(eqs) + ineqs, list(sys.equalities), sys.ground)
    return Elimination(out, steps, infeasible)


def eliminate_all(sys: ConstraintSystem, keep: Iterable[str], order: Sequence[str] | None = None,
                  **kw) -> Elimination:
    keep = set(keep)
    todo = [s for s in (order or sorted(sys.symbols())) if s not in keep]
    rest = sorted(sys.symbols() - keep - set(todo))
    return fm_eliminate(sys, list(todo) + rest, **kw)
