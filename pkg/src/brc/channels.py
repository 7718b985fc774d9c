"""Broadcast relay channel models, induced joints and degradedness tests."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .prob import DiscretePMF, ProbError, _as_fraction, markov_violation, random_pmf, uniform

BRC_INPUTS = ("X", "X1", "X2")
BRC_OUTPUTS = ("Y1", "Z1", "Y2", "Z2")
BRC_CR_INPUTS = ("X", "X1")
BRC_CR_OUTPUTS = ("Y1", "Z1", "Y2")
BC_INPUTS = ("X",)
BC_OUTPUTS = ("Y1", "Y2")

DEFAULT_SEED = 0xB12C


class ChannelError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Channel:
    """Memoryless channel law P(outputs | inputs).

    ``law`` has shape ``input_sizes + output_sizes``; every slice over the
    output axes is a probability table.
    """

    input_names: tuple[str, ...]
    input_sizes: tuple[int, ...]
    output_names: tuple[str, ...]
    output_sizes: tuple[int, ...]
    law: np.ndarray = field(repr=False)

    expected_inputs: tuple[str, ...] = field(default=(), init=False, repr=False)
    expected_outputs: tuple[str, ...] = field(default=(), init=False, repr=False)

    def __post_init__(self):
        ins, outs = tuple(self.input_names), tuple(self.output_names)
        if self.expected_inputs and (ins, outs) != (self.expected_inputs, self.expected_outputs):
            raise ChannelError(
                f"{type(self).__name__} needs inputs {self.expected_inputs} and outputs "
                f"{self.expected_outputs}, got {ins} / {outs}")
        isz = tuple(int(s) for s in self.input_sizes)
        osz = tuple(int(s) for s in self.output_sizes)
        if any(s < 1 for s in isz + osz):
            raise ChannelError("alphabet sizes must be >= 1")
        law = np.asarray(self.law)
        if law.size != int(np.prod(isz + osz, dtype=np.int64)):
            raise ChannelError(f"law has {law.size} entries, expected shape {isz + osz}")
        law = law.reshape(isz + osz)
        out_axes = tuple(range(len(isz), len(isz) + len(osz)))
        if law.dtype == object:
            law = np.vectorize(_as_fraction, otypes=[object])(law)
            if any(v < 0 for v in law.flat):
                raise ChannelError("negative transition probability")
            sums = law.sum(axis=out_axes)
            if not all(s == 1 for s in np.asarray(sums).flat):
                raise ChannelError("a conditional row does not sum to 1")
        else:
            law = law.astype(np.float64, copy=True)
            if np.any(law < 0):
                raise ChannelError("negative transition probability")
            if np.max(np.abs(law.sum(axis=out_axes) - 1.0)) > 1e-12:
                raise ChannelError("a conditional row does not sum to 1")
        law.setflags(write=False)
        object.__setattr__(self, "input_names", ins)
        object.__setattr__(self, "output_names", outs)
        object.__setattr__(self, "input_sizes", isz)
        object.__setattr__(self, "output_sizes", osz)
        object.__setattr__(self, "law", law)

    @property
    def exact(self) -> bool:
        return self.law.dtype == object

    def sizes(self) -> dict[str, int]:
        return dict(zip(self.input_names + self.output_names, self.input_sizes + self.output_sizes))

    def row(self, given: Sequence[int]) -> DiscretePMF:
        return DiscretePMF(self.output_names, self.output_sizes, self.law[tuple(given)])

    def to_float(self):
        if not self.exact:
            return self
        law = np.array([float(v) for v in self.law.flat]).reshape(self.law.shape)
        return type(self)(self.input_names, self.input_sizes, self.output_names,
                          self.output_sizes, law)

    def relabel_outputs(self, perms: dict[str, Sequence[int]]):
        """Channel with output symbols permuted: new symbol perm[i] carries old i."""
        law = self.law
        k = len(self.input_names)
        for name, perm in perms.items():
            ax = k + self.output_names.index(name)
            inv = np.argsort(np.asarray(perm))
            law = np.take(law, inv, axis=ax)
        return type(self)(self.input_names, self.input_sizes, self.output_names,
                          self.output_sizes, law)

    def to_json(self) -> dict:
        rows = []
        for given in np.ndindex(*self.input_sizes):
            pmf = self.law[given]
            flat = [str(v) for v in pmf.flat] if self.exact else [float(v) for v in pmf.flat]
            rows.append({"given": list(given), "pmf": flat})
        return {
            "inputs": [{"name": n, "size": s} for n, s in zip(self.input_names, self.input_sizes)],
            "outputs": [{"name": n, "size": s} for n, s in zip(self.output_names, self.output_sizes)],
            "rows": rows,
        }


class BrcChannel(Channel):
    """Two-relay BRC: P(y1, z1, y2, z2 | x, x1, x2)."""

    def __post_init__(self):
        object.__setattr__(self, "expected_inputs", BRC_INPUTS)
        object.__setattr__(self, "expected_outputs", BRC_OUTPUTS)
        super().__post_init__()


class BrcCrChannel(Channel):
    """BRC with a common relay: P(y1, z1, y2 | x, x1)."""

    def __post_init__(self):
        object.__setattr__(self, "expected_inputs", BRC_CR_INPUTS)
        object.__setattr__(self, "expected_outputs", BRC_CR_OUTPUTS)
        super().__post_init__()


class BroadcastChannel(Channel):
    """Plain two-user broadcast channel P(y1, y2 | x)."""

    def __post_init__(self):
        object.__setattr__(self, "expected_inputs", BC_INPUTS)
        object.__setattr__(self, "expected_outputs", BC_OUTPUTS)
        super().__post_init__()


_KINDS = {
    (BRC_INPUTS, BRC_OUTPUTS): BrcChannel,
    (BRC_CR_INPUTS, BRC_CR_OUTPUTS): BrcCrChannel,
    (BC_INPUTS, BC_OUTPUTS): BroadcastChannel,
}


def channel_from_json(data: dict | str) -> Channel:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        ins = [(v["name"], int(v["size"])) for v in data["inputs"]]
        outs = [(v["name"], int(v["size"])) for v in data["outputs"]]
        rows = data["rows"]
    except (KeyError, TypeError) as exc:
        raise ChannelError(f"malformed channel JSON: missing {exc}") from exc
    in_names = tuple(n for n, _ in ins)
    out_names = tuple(n for n, _ in outs)
    cls = _KINDS.get((in_names, out_names))
    if cls is None:
        raise ChannelError(f"unrecognised channel signature {in_names} -> {out_names}")
    isz = tuple(s for _, s in ins)
    osz = tuple(s for _, s in outs)
    n_out = int(np.prod(osz))
    exact = any(isinstance(v, str) for r in rows for v in r.get("pmf", []))
    law = np.empty(isz + (n_out,), dtype=object if exact else np.float64)
    seen = set()
    for i, r in enumerate(rows):
        try:
            given = tuple(int(g) for g in r["given"])
            pmf = r["pmf"]
        except (KeyError, TypeError) as exc:
            raise ChannelError(f"row {i}: missing {exc}") from exc
        if len(given) != len(isz) or any(not 0 <= g < s for g, s in zip(given, isz)):
            raise ChannelError(f"row {i}: bad input index {list(given)}")
        if len(pmf) != n_out:
            raise ChannelError(f"row {i}: pmf has {len(pmf)} entries, expected {n_out}")
        law[given] = [_as_fraction(v) for v in pmf] if exact else pmf
        seen.add(given)
    if len(seen) != int(np.prod(isz)):
        raise ChannelError(f"expected {int(np.prod(isz))} rows, got {len(seen)} distinct")
    return cls(in_names, isz, out_names, osz, law.reshape(isz + osz))


def induced_joint(ch: Channel, input_dist: DiscretePMF) -> DiscretePMF:
    """Joint of ``input_dist`` (inputs plus any auxiliaries) and the outputs.

    The channel is applied to the input coordinates only, so the auxiliaries
    are conditionally independent of the outputs given the inputs.
    """
    for name, size in zip(ch.input_names, ch.input_sizes):
        if name not in input_dist.names:
            raise ChannelError(f"input distribution lacks channel input {name}")
        if input_dist.size_of(name) != size:
            raise ChannelError(
                f"alphabet mismatch for {name}: {input_dist.size_of(name)} vs {size}")
    clash = set(ch.output_names) & set(input_dist.names)
    if clash:
        raise ChannelError(f"input distribution already contains outputs {sorted(clash)}")
    k = len(ch.input_names)
    # reorder the law's input axes to their order of appearance in input_dist
    present = [n for n in input_dist.names if n in ch.input_names]
    law = np.transpose(ch.law, [ch.input_names.index(n) for n in present]
                       + list(range(k, ch.law.ndim)))
    shape = [input_dist.size_of(n) if n in ch.input_names else 1 for n in input_dist.names]
    law = law.reshape(tuple(shape) + ch.output_sizes)
    p = input_dist.probs
    if ch.exact != input_dist.exact:
        if ch.exact:
            law = np.array([float(v) for v in law.flat]).reshape(law.shape)
        else:
            p = input_dist.float_probs()
    joint = p.reshape(p.shape + (1,) * len(ch.output_sizes)) * law
    return DiscretePMF(input_dist.names + ch.output_names,
                       input_dist.sizes + ch.output_sizes, joint)


# -- degradedness ---------------------------------------------------------

DEGRADED, SEMI_DEGRADED, BOTH, NEITHER = "Degraded", "SemiDegraded", "Both", "Neither"

# name -> (A, B, C) meaning A - B - C
CHAINS = {
    "I.1": ({"X"}, {"X1", "Z1"}, {"Y1", "Y2"}),
    "I.2": ({"X", "X1"}, {"Y1"}, {"Y2"}),
    "II.1": ({"X"}, {"X1", "Z1"}, {"Y1"}),
    "II.2": ({"X"}, {"Y2", "X1"}, {"Z1"}),
}


@dataclass(frozen=True)
class DegradednessClass:
    kind: str
    violations: dict  # chain name -> worst I(A;C|B) over the input family
    per_input: tuple = ()  # one {chain: violation} dict per input distribution
    tol: float = 0.0

    @property
    def is_degraded(self) -> bool:
        return self.kind in (DEGRADED, BOTH)

    @property
    def is_semi_degraded(self) -> bool:
        return self.kind in (SEMI_DEGRADED, BOTH)

    def describe(self) -> str:
        lines = [self.kind]
        for name, (A, B, C) in CHAINS.items():
            chain = f"{','.join(sorted(A))} - {','.join(sorted(B))} - {','.join(sorted(C))}"
            lines.append(f"  ({name}) {chain}: max I = {self.violations[name]:.3e}")
        return "\n".join(lines)


def default_input_family(ch: Channel, n_random: int = 16, seed: int = DEFAULT_SEED,
                         exact: bool | None = None) -> list[DiscretePMF]:
    """Uniform input plus ``n_random`` full-support random inputs."""
    exact = ch.exact if exact is None else exact
    rng = np.random.default_rng(seed)
    fam = [uniform(ch.input_names, ch.input_sizes, exact=exact)]
    fam += [random_pmf(ch.input_names, ch.input_sizes, rng, exact=exact) for _ in range(n_random)]
    return fam


def classify_brc_cr(ch: BrcCrChannel, input_family: Sequence[DiscretePMF] | None = None,
                    tol: float | None = None) -> DegradednessClass:
    """Degradedness class of a common-relay channel over a family of inputs."""
    if not isinstance(ch, BrcCrChannel):
        raise ChannelError("classification is defined for BRC-CR channels")
    if input_family is None:
        input_family = default_input_family(ch)
    if tol is None:
        tol = 1e-9 if ch.exact else 1e-7
    per_input = []
    worst = {name: 0.0 for name in CHAINS}
    for dist in input_family:
        if any(v == 0 for v in np.asarray(dist.probs).flat):
            raise ChannelError("input family members must have full support")
        joint = induced_joint(ch, dist)
        row = {name: markov_violation(joint, *abc) for name, abc in CHAINS.items()}
        per_input.append(row)
        for name, v in row.items():
            worst[name] = max(worst[name], v)
    cond_i = worst["I.1"] <= tol and worst["I.2"] <= tol
    cond_ii = worst["II.1"] <= tol and worst["II.2"] <= tol
    kind = BOTH if cond_i and cond_ii else DEGRADED if cond_i else \
        SEMI_DEGRADED if cond_ii else NEITHER
    return DegradednessClass(kind, worst, tuple(per_input), tol)


# -- test channel constructors -------------------------------------------

def _prob(v, exact: bool):
    v = _as_fraction(v) if exact else float(v)
    if not 0 <= v <= 1:
        raise ChannelError(f"invalid probability {v}")
    return v


def _bsc_kernel(p, exact: bool) -> np.ndarray:
    one = Fraction(1) if exact else 1.0
    return np.array([[one - p, p], [p, one - p]], dtype=object if exact else np.float64)


def _zeros(shape, exact):
    return np.full(shape, Fraction(0), dtype=object) if exact else np.zeros(shape)


def make_test_channel(kind: str, exact: bool = True, **params) -> Channel:
    """Canonical binary constructions with known degradedness.

    Kinds (noise parameters are BSC crossover probabilities):

    ``noiseless``            Y1 = Y2 = Z1 = X, one-symbol relay input.
    ``degraded-cascade``     Z1 = X+a, Y1 = Z1+X1+b, Y2 = Y1+c (a, b, c);
                             ``relay_size=1`` drops the X1 term.
    ``bc-only``              degraded BC Y1 = X+p1, Y2 = Y1+p2; relay hears X
                             perfectly but has a one-symbol input.
    ``semi-degraded-cascade`` Y2 = X+p, Z1 = Y2+q, Y1 = Z1+X1+r.
    ``neither``              Z1 constant, Y1 = X, Y2 = X+p.
    ``silent-relay-bc``      two-relay BRC built from a broadcast channel given
                             as ``bc``: one-symbol relay inputs, Z_b = Y_b.

    All additive noises are independent and "+" is XOR.
    """
    one = Fraction(1) if exact else 1.0
    dtype = object if exact else np.float64

    if kind == "silent-relay-bc":
        return silence_relays(params["bc"])
    if kind == "noiseless":
        law = _zeros((2, 1, 2, 2, 2), exact)
        for x in range(2):
            law[x, 0, x, x, x] = one
        return BrcCrChannel(BRC_CR_INPUTS, (2, 1), BRC_CR_OUTPUTS, (2, 2, 2), law)

    if kind == "degraded-cascade":
        a, b, c = (_prob(params.get(k, 0), exact) for k in ("a", "b", "c"))
        r_size = int(params.get("relay_size", 2))
        A, B, Cm = _bsc_kernel(a, exact), _bsc_kernel(b, exact), _bsc_kernel(c, exact)
        law = _zeros((2, r_size, 2, 2, 2), exact)
        for x, x1, z1, y1, y2 in np.ndindex(2, r_size, 2, 2, 2):
            law[x, x1, y1, z1, y2] = A[x, z1] * B[z1 ^ (x1 if r_size > 1 else 0), y1] * Cm[y1, y2]
        return BrcCrChannel(BRC_CR_INPUTS, (2, r_size), BRC_CR_OUTPUTS, (2, 2, 2), law)

    if kind == "bc-only":
        p1, p2 = _prob(params.get("p1", 0), exact), _prob(params.get("p2", 0), exact)
        K1, K2 = _bsc_kernel(p1, exact), _bsc_kernel(p2, exact)
        law = _zeros((2, 1, 2, 2, 2), exact)
        for x, y1, y2 in np.ndindex(2, 2, 2):
            law[x, 0, y1, x, y2] = K1[x, y1] * K2[y1, y2]
        return BrcCrChannel(BRC_CR_INPUTS, (2, 1), BRC_CR_OUTPUTS, (2, 2, 2), law)

    if kind == "semi-degraded-cascade":
        p, q, r = (_prob(params.get(k, 0), exact) for k in ("p", "q", "r"))
        Kp, Kq, Kr = _bsc_kernel(p, exact), _bsc_kernel(q, exact), _bsc_kernel(r, exact)
        law = _zeros((2, 2, 2, 2, 2), exact)
        for x, x1, y1, z1, y2 in np.ndindex(2, 2, 2, 2, 2):
            law[x, x1, y1, z1, y2] = Kp[x, y2] * Kq[y2, z1] * Kr[z1 ^ x1, y1]
        return BrcCrChannel(BRC_CR_INPUTS, (2, 2), BRC_CR_OUTPUTS, (2, 2, 2), law)

    if kind == "neither":
        p = _prob(params.get("p", Fraction(1, 10)), exact)
        Kp = _bsc_kernel(p, exact)
        law = _zeros((2, 1, 2, 1, 2), exact)
        for x, y2 in np.ndindex(2, 2):
            law[x, 0, x, 0, y2] = Kp[x, y2]
        return BrcCrChannel(BRC_CR_INPUTS, (2, 1), BRC_CR_OUTPUTS, (2, 1, 2), law)

    raise ChannelError(f"unknown test channel kind {kind!r}")


def bsc_broadcast(p1, p2, exact: bool = False) -> BroadcastChannel:
    """Degraded binary BC: Y1 = X+p1, Y2 = Y1+p2."""
    K1, K2 = _bsc_kernel(_prob(p1, exact), exact), _bsc_kernel(_prob(p2, exact), exact)
    law = _zeros((2, 2, 2), exact)
    for x, y1, y2 in np.ndindex(2, 2, 2):
        law[x, y1, y2] = K1[x, y1] * K2[y1, y2]
    return BroadcastChannel(BC_INPUTS, (2,), BC_OUTPUTS, (2, 2), law)


def random_broadcast(rng: np.random.Generator, x_size: int = 2, y_sizes=(2, 2)) -> BroadcastChannel:
    """Random BC with independent-output rows drawn from a Dirichlet."""
    law = rng.dirichlet(np.ones(y_sizes[0] * y_sizes[1]), size=x_size)
    return BroadcastChannel(BC_INPUTS, (x_size,), BC_OUTPUTS, tuple(y_sizes),
                            law.reshape((x_size,) + tuple(y_sizes)))


def broadcast_part(ch: Channel) -> BroadcastChannel:
    """P(y1, y2 | x) with every relay input fixed to symbol 0."""
    if isinstance(ch, BroadcastChannel):
        return ch
    law = ch.law
    idx = (slice(None),) + (0,) * (len(ch.input_names) - 1)
    law = law[idx]  # axes: x, outputs...
    keep = [ch.output_names.index("Y1"), ch.output_names.index("Y2")]
    drop = tuple(1 + i for i in range(len(ch.output_names)) if i not in keep)
    law = law.sum(axis=drop)
    return BroadcastChannel(BC_INPUTS, (ch.input_sizes[0],), BC_OUTPUTS,
                            (ch.sizes()["Y1"], ch.sizes()["Y2"]), law)


def silence_relays(bc: BroadcastChannel) -> BrcChannel:
    """Embed a BC as a BRC with one-symbol relay inputs and Z_b = Y_b."""
    nx = bc.input_sizes[0]
    n1, n2 = bc.output_sizes
    law = _zeros((nx, 1, 1, n1, n1, n2, n2), bc.exact)
    for x, y1, y2 in np.ndindex(nx, n1, n2):
        law[x, 0, 0, y1, y1, y2, y2] = bc.law[x, y1, y2]
    return BrcChannel(BRC_INPUTS, (nx, 1, 1), BRC_OUTPUTS, (n1, n1, n2, n2), law)


def tie_relays(ch: BrcCrChannel) -> BrcChannel:
    """BRC view of a common-relay channel: X2 is ignored and Z2 copies Z1."""
    nx, n1 = ch.input_sizes
    ny1, nz1, ny2 = ch.output_sizes
    law = _zeros((nx, n1, n1, ny1, nz1, ny2, nz1), ch.exact)
    for x, x1, x2, y1, z1, y2 in np.ndindex(nx, n1, n1, ny1, nz1, ny2):
        law[x, x1, x2, y1, z1, y2, z1] = ch.law[x, x1, y1, z1, y2]
    return BrcChannel(BRC_INPUTS, (nx, n1, n1), BRC_OUTPUTS, (ny1, nz1, ny2, nz1), law)
