"""Linear information expressions in entropy coordinates.

An expression such as I(A;B|C) is a linear form over joint entropies
H(S), S a non-empty subset of a ground set of symbols. Two expressions are
equal as functionals on every distribution iff their forms agree, so the
chain rule and friends hold without any special-casing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping

GROUND = ("V0", "U0", "U1", "U2", "U3", "U4", "X1", "X2", "X", "Z1", "Z2", "Y1", "Y2")
RATE_SYMBOLS = ("R0", "R1", "R2", "S01", "S02", "S1", "S2", "S3", "S4",
                "T0", "T1", "T2", "T3", "T4")


class ExprError(ValueError):
    pass


def _symset(s) -> frozenset:
    if isinstance(s, str):
        s = [t for t in s.replace(" ", "").split(",") if t]
    return frozenset(s)


def _order(S: frozenset, ground: tuple = GROUND) -> list:
    pos = {n: i for i, n in enumerate(ground)}
    return sorted(S, key=lambda n: (pos.get(n, len(ground)), n))


def _fmt_set(S: frozenset, ground: tuple = GROUND) -> str:
    return ",".join(_order(S, ground))


class EntropyForm:
    """Rational linear combination of joint entropies, keyed by symbol sets."""

    __slots__ = ("_c", "_key")

    def __init__(self, coeffs: Mapping[frozenset, Fraction] | None = None):
        c = {}
        for S, v in (coeffs or {}).items():
            S = frozenset(S)
            if not S:
                continue  # H(empty) = 0
            v = Fraction(v)
            if v:
                c[S] = c.get(S, Fraction(0)) + v
                if not c[S]:
                    del c[S]
        self._c = c
        self._key = None

    @classmethod
    def H(cls, S) -> "EntropyForm":
        return cls({_symset(S): 1})

    @property
    def coeffs(self) -> dict:
        return dict(self._c)

    def symbols(self) -> frozenset:
        out = frozenset()
        for S in self._c:
            out |= S
        return out

    def is_zero(self) -> bool:
        return not self._c

    def key(self, ground: tuple = GROUND) -> tuple:
        if self._key is None:
            self._key = tuple(sorted(((bitmask(S, ground), v) for S, v in self._c.items())))
        return self._key

    def __add__(self, other):
        if not isinstance(other, EntropyForm):
            other = as_form(other)
        c = dict(self._c)
        for S, v in other._c.items():
            c[S] = c.get(S, Fraction(0)) + v
        return EntropyForm(c)

    __radd__ = __add__

    def __neg__(self):
        return EntropyForm({S: -v for S, v in self._c.items()})

    def __sub__(self, other):
        return self + (-as_form(other))

    def __rsub__(self, other):
        return as_form(other) - self

    def __mul__(self, k):
        k = Fraction(k)
        return EntropyForm({S: v * k for S, v in self._c.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, (EntropyForm, InfoExpr, InfoTerm)):
            return NotImplemented
        return (self - as_form(other)).is_zero()

    def __hash__(self):
        return hash(self.key())

    def evaluate(self, pmf) -> float:
        """Value on a DiscretePMF whose variables cover every symbol."""
        from ..prob import entropy
        return float(sum(float(v) * entropy(pmf, S) for S, v in self._c.items()))

    def form(self) -> "EntropyForm":
        return self

    def __repr__(self):
        if not self._c:
            return "0"
        parts = []
        for S, v in sorted(self._c.items(), key=lambda kv: -bitmask(kv[0])):
            parts.append(f"{_coef(v)}H({_fmt_set(S)})")
        return " ".join(parts).lstrip("+ ")


def bitmask(S: frozenset, ground: tuple = GROUND) -> int:
    m = 0
    for n in S:
        try:
            m |= 1 << ground.index(n)
        except ValueError:
            raise ExprError(f"symbol {n!r} is not in the ground set") from None
    return m


def _coef(v: Fraction) -> str:
    sign = "-" if v < 0 else "+"
    a = abs(v)
    return f"{sign} " if a == 1 else f"{sign} {a}*"


@dataclass(frozen=True, order=True)
class InfoTerm:
    """I(A;B|C) with A, B, C disjoint symbol sets; A and B are unordered."""

    A: frozenset
    B: frozenset
    C: frozenset = frozenset()

    def __post_init__(self):
        A, B, C = _symset(self.A), _symset(self.B), _symset(self.C)
        if not A or not B:
            raise ExprError("I(A;B|C) needs non-empty A and B")
        if (A & B) or (A & C) or (B & C):
            raise ExprError(f"overlapping sets in I({sorted(A)};{sorted(B)}|{sorted(C)})")
        if bitmask(B) < bitmask(A):
            A, B = B, A
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)

    def form(self) -> EntropyForm:
        A, B, C = self.A, self.B, self.C
        return EntropyForm({A | C: 1}) + EntropyForm({B | C: 1}) \
            - EntropyForm({A | B | C: 1}) - EntropyForm({C: 1})

    def __str__(self):
        s = f"I({_fmt_set(self.A)};{_fmt_set(self.B)}"
        return s + (f"|{_fmt_set(self.C)})" if self.C else ")")


def info_term(A, B, C=()) -> EntropyForm:
    """Entropy-coordinate form of I(A;B|C)."""
    return InfoTerm(_symset(A), _symset(B), _symset(C)).form()


def I(A, B, C=()) -> "InfoExpr":
    """I(A;B|C) as a one-term expression; sets may be 'U0,V0' strings."""
    return InfoExpr({InfoTerm(_symset(A), _symset(B), _symset(C)): 1})


class InfoExpr:
    """Sum of information terms, kept term-wise for display.

    Equality and canonicalization go through entropy coordinates.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[InfoTerm, Fraction] | None = None):
        t = {}
        for k, v in (terms or {}).items():
            v = Fraction(v)
            if v:
                t[k] = t.get(k, Fraction(0)) + v
                if not t[k]:
                    del t[k]
        self.terms = t

    def form(self) -> EntropyForm:
        out = EntropyForm()
        for t, v in self.terms.items():
            out = out + t.form() * v
        return out

    def __add__(self, other):
        if isinstance(other, EntropyForm):
            return self.form() + other
        if not isinstance(other, InfoExpr):
            if other == 0:
                return self
            return NotImplemented
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, Fraction(0)) + v
        return InfoExpr(t)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return InfoExpr({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, k):
        k = Fraction(k)
        return InfoExpr({t: v * k for t, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, (EntropyForm, InfoExpr, InfoTerm)):
            return NotImplemented
        return (self.form() - as_form(other)).is_zero()

    def __hash__(self):
        return hash(self.form())

    def evaluate(self, pmf) -> float:
        from ..prob import mutual_information
        return float(sum(float(v) * mutual_information(pmf, t.A, t.B, t.C or None)
                         for t, v in self.terms.items()))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for t, v in sorted(self.terms.items(), key=lambda kv: (kv[1] < 0, str(kv[0]))):
            parts.append(f"{_coef(v)}{t}")
        return " ".join(parts).lstrip("+ ")

    __repr__ = __str__


def as_form(x) -> EntropyForm:
    if isinstance(x, EntropyForm):
        return x
    if isinstance(x, (InfoExpr, InfoTerm)):
        return x.form()
    if x == 0:
        return EntropyForm()
    raise ExprError(f"cannot read {x!r} as an entropy form")


# -- inequalities ---------------------------------------------------------

_RELATIONS = ("<=", ">=", "=")


@dataclass(frozen=True, eq=False)
class LinearInfoInequality:
    """``sum_k c_k * sym_k  REL  rhs`` over rate symbols.

    ``>=`` is stored flipped as ``<=``. The rhs is an InfoExpr, an
    EntropyForm or (for plain numeric systems) a Fraction.
    """

    coeffs: Mapping[str, Fraction]
    rhs: object = 0
    relation: str = "<="
    label: str = ""
    history: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.relation not in _RELATIONS:
            raise ExprError(f"relation must be one of {_RELATIONS}")
        c = {k: Fraction(v) for k, v in dict(self.coeffs).items() if Fraction(v)}
        rhs = self.rhs
        if isinstance(rhs, (int, float)):
            rhs = Fraction(rhs)
        if self.relation == ">=":
            c = {k: -v for k, v in c.items()}
            rhs = -rhs
            object.__setattr__(self, "relation", "<=")
        object.__setattr__(self, "coeffs", dict(sorted(c.items(), key=_sym_order)))
        object.__setattr__(self, "rhs", rhs)

    def coef(self, sym: str) -> Fraction:
        return self.coeffs.get(sym, Fraction(0))

    def symbols(self) -> frozenset:
        return frozenset(self.coeffs)

    def scaled(self, k) -> "LinearInfoInequality":
        k = Fraction(k)
        if k <= 0 and self.relation == "<=":
            raise ExprError("inequalities may only be scaled by positive factors")
        return LinearInfoInequality({s: v * k for s, v in self.coeffs.items()}, self.rhs * k,
                                    self.relation, self.label, self.history)

    def normalized(self) -> "LinearInfoInequality":
        """Scale so the rate coefficients are coprime integers."""
        if not self.coeffs:
            return self
        vals = list(self.coeffs.values())
        den = lcm(*(v.denominator for v in vals))
        num = 0
        for v in vals:
            num = gcd(num, int(v * den))
        out = self.scaled(Fraction(den, num))
        if self.relation == "=" and next(iter(out.coeffs.values())) < 0:
            out = LinearInfoInequality({s: -v for s, v in out.coeffs.items()}, -out.rhs, "=",
                                       self.label, self.history)
        return out

    def lhs_str(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for s, v in self.coeffs.items():
            parts.append(f"{_coef(v)}{s}")
        return " ".join(parts).lstrip("+ ")

    def __str__(self):
        return f"{self.lhs_str()} {self.relation} {self.rhs}"


def _sym_order(kv):
    s = kv[0]
    return (RATE_SYMBOLS.index(s) if s in RATE_SYMBOLS else len(RATE_SYMBOLS), s)


@dataclass
class ConstraintSystem:
    rows: list
    equalities: list = field(default_factory=list)  # entropy forms that vanish
    ground: tuple = GROUND

    def __post_init__(self):
        for f in self.equalities:
            for n in as_form(f).symbols():
                if n not in self.ground:
                    raise ExprError(f"identity uses {n!r} outside the ground set")

    def symbols(self) -> frozenset:
        out = frozenset()
        for r in self.rows:
            out |= r.symbols()
        return out

    def without(self, labels: Iterable[str]) -> "ConstraintSystem":
        drop = set(labels)
        rows = [r for r in self.rows if r.label not in drop and r.label.split(".")[0] not in drop]
        return ConstraintSystem(rows, list(self.equalities), self.ground)

    def table(self) -> str:
        return "\n".join(f"{r.label or '-':<14} {r}" for r in self.rows)


# -- canonicalization -----------------------------------------------------

class IdentityReducer:
    """Reduction modulo the span of a list of vanishing entropy forms.

    The identities are brought to reduced row echelon form with the pivot of
    each row at its largest subset bitmask, so every form has exactly one
    reduced representative.
    """

    def __init__(self, identities: Iterable = (), ground: tuple = GROUND):
        self.ground = ground
        rows: list[dict] = []
        for f in identities:
            c = {bitmask(S, ground): v for S, v in as_form(f).coeffs.items()}
            c = self._reduce_with(rows, c)
            if not c:
                continue
            p = max(c)
            inv = 1 / c[p]
            c = {k: v * inv for k, v in c.items()}
            # clear the new pivot from earlier rows to stay fully reduced
            for r in rows:
                if p in r:
                    k = r[p]
                    for m, v in c.items():
                        r[m] = r.get(m, Fraction(0)) - k * v
                        if not r[m]:
                            del r[m]
            rows.append(c)
        self.rows = sorted(rows, key=lambda r: -max(r))
        self._sets = {}

    @staticmethod
    def _reduce_with(rows, c):
        c = dict(c)
        for r in sorted(rows, key=lambda r: -max(r)):
            p = max(r)
            if p in c:
                k = c[p]
                for m, v in r.items():
                    c[m] = c.get(m, Fraction(0)) - k * v
                    if not c[m]:
                        del c[m]
        return c

    @property
    def pivots(self) -> list[int]:
        return [max(r) for r in self.rows]

    def reduce(self, f) -> EntropyForm:
        f = as_form(f)
        c = {bitmask(S, self.ground): v for S, v in f.coeffs.items()}
        c = self._reduce_with(self.rows, c)
        return EntropyForm({self._set(m): v for m, v in c.items()})

    def _set(self, m: int) -> frozenset:
        if m not in self._sets:
            self._sets[m] = frozenset(n for i, n in enumerate(self.ground) if m >> i & 1)
        return self._sets[m]


def canonicalize(ineq: LinearInfoInequality, equalities=None,
                 reducer: IdentityReducer | None = None) -> LinearInfoInequality:
    """Unique representative of ``ineq`` modulo chain rule and the identities.

    Rate coefficients are scaled to coprime integers; rows without rate
    symbols are scaled so the reduced form's top coefficient is +-1.
    """
    if reducer is None:
        reducer = IdentityReducer(equalities or ())
    f = reducer.reduce(ineq.rhs)
    out = LinearInfoInequality(ineq.coeffs, f, ineq.relation, ineq.label, ineq.history)
    if out.coeffs:
        return out.normalized()
    if f.is_zero():
        return out
    top = max(f.coeffs.items(), key=lambda kv: bitmask(kv[0], reducer.ground))[1]
    return out.scaled(1 / abs(top))


def canonical_key(ineq: LinearInfoInequality, reducer: IdentityReducer) -> tuple:
    c = canonicalize(ineq, reducer=reducer)
    return (c.relation, tuple(c.coeffs.items()), as_form(c.rhs).key(reducer.ground))
