"""Command-line front end.

Exit status: 0 on success, 1 on invalid input, 2 when ``derive-fm`` fails or
``compare-regions`` finds the expected relation violated.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import io
from .bounds import EVALUATORS, BoundsError, FORMULAS
from .channels import (BrcCrChannel, ChannelError, channel_from_json, classify_brc_cr,
                       default_input_family, tie_relays)
from .prob import ProbError
from .regions import RegionError, includes
from .sampling import DEFAULT_SEED, AuxSpec

EXIT_OK, EXIT_INVALID, EXIT_FAIL = 0, 1, 2

_THEOREM_FORMULA = {"1": "theorem1", "cor2": "corollary2", "3": "theorem3", "conj1": "conjecture1",
                    "4": "theorem4", "marton": "marton"}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    aux: AuxSpec | None = None
    tol: float | None = None
    seed: int = DEFAULT_SEED
    outputs: dict = field(default_factory=dict)   # kind -> path
    workers: int | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        for p in self.inputs:
            if not Path(p).exists():
                raise UsageError(f"input file not found: {p}")


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: "
                         f"{exc.msg}") from None


def _load_channel(path):
    try:
        return channel_from_json(_load_json(path))
    except (ChannelError, ProbError) as exc:
        raise UsageError(f"{path}: {exc}") from None


# -- commands -----------------------------------------------------------------

def cmd_compute_region(cfg: RunConfig, out) -> int:
    ch = _load_channel(cfg.inputs[0])
    theorem = cfg.options["theorem"]
    if theorem == "1" and isinstance(ch, BrcCrChannel):
        ch = tie_relays(ch)
    spec = cfg.aux or AuxSpec(seed=cfg.seed)
    try:
        report = EVALUATORS[theorem](ch, spec, workers=cfg.workers)
    except BoundsError as exc:
        raise UsageError(str(exc)) from None
    io.write_region_csv(report.region, cfg.outputs["csv"])
    labels = FORMULAS[_THEOREM_FORMULA[theorem]].labels
    if "json" in cfg.outputs:
        io.write_region_json(report.region, cfg.outputs["json"], labels=labels,
                             meta={"formula": report.formula, "evaluated_pds": report.n_evaluated,
                                   "flags": list(report.flags), "aux": spec.to_json()})
    if "svg" in cfg.outputs:
        io.write_region_svg(report.region, cfg.outputs["svg"], labels=labels, title=report.formula)
    print(f"{report.formula}: {len(report.region.vertices)} vertices from "
          f"{report.n_evaluated} PDs -> {cfg.outputs['csv']}", file=out)
    for f in report.flags:
        print(f"note: {f}", file=out)
    return EXIT_OK


def cmd_check_degraded(cfg: RunConfig, out) -> int:
    ch = _load_channel(cfg.inputs[0])
    if not isinstance(ch, BrcCrChannel):
        raise UsageError("check-degraded needs a common-relay channel (inputs X, X1)")
    fam = default_input_family(ch, n_random=cfg.options.get("n_random", 16), seed=cfg.seed)
    cls = classify_brc_cr(ch, fam, cfg.tol)
    print(cls.describe(), file=out)
    return EXIT_OK


def cmd_derive_fm(cfg: RunConfig, out) -> int:
    from .infocalc.theorem1 import audit_extra_rows, derive_and_compare, dump_steps, \
        binning_simplifications

    drop = cfg.options.get("drop", ())
    if drop:
        from .infocalc.theorem1 import build_theorem1_system
        known = {r.label for r in build_theorem1_system().rows}
        known |= {k.split(".")[0] for k in known}
        unknown = sorted(set(drop) - known)
        if unknown:
            raise UsageError(f"unknown constraint label(s) {unknown}; known: {sorted(known)}")
    report = derive_and_compare(drop=drop)
    for s in binning_simplifications():
        print(f"{s.name}: {s.combined.lhs_str()} <= {s.expected}: "
              f"{'reduces exactly' if s.holds else 'DOES NOT reduce'}", file=out)
    print(report.summary(timing=bool(cfg.options.get("timing"))), file=out)
    if cfg.options.get("audit"):
        au = audit_extra_rows(report)
        cutting = [a for a in au if a.cuts]
        print(f"extra rows cutting the stated region on >= 1 of {au[0].n_pds if au else 0} "
              f"sampled PDs: {len(cutting)}", file=out)
        for a in cutting:
            print(f"  [{a.cuts}] {a.row}", file=out)
    if "steps" in cfg.outputs:
        dump_steps(report, cfg.outputs["steps"])
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_gaussian_sweep(cfg: RunConfig, out) -> int:
    from .gaussian import GaussianBrcParams, SweepSpec, gaussian_sweep

    o = cfg.options
    try:
        params = GaussianBrcParams(o["P"], o["P1"], o["N1"], o["N2"], o["Nr"])
        spec = SweepSpec.uniform(o["grid"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sw = gaussian_sweep(params, spec, workers=cfg.workers)
    io.write_region_csv(sw.region, cfg.outputs["csv"])
    if "json" in cfg.outputs:
        io.write_region_json(sw.region, cfg.outputs["json"], labels=("R0", "R1"),
                             meta={"params": params.__dict__, "grid": o["grid"]})
    if "svg" in cfg.outputs:
        io.write_region_svg(sw.region, cfg.outputs["svg"], labels=("R0", "R1"),
                            title="degraded Gaussian BRC-CR")
    s = max(float(v.sum()) for v in sw.region.vertices)
    print(f"{len(sw.region.vertices)} vertices, max R0+R1 = {s:.12g} bits -> "
          f"{cfg.outputs['csv']}", file=out)
    return EXIT_OK


def cmd_compare_regions(cfg: RunConfig, out) -> int:
    try:
        A = io.read_region(cfg.inputs[0])
        B = io.read_region(cfg.inputs[1])
    except io.FormatError as exc:
        raise UsageError(str(exc)) from None
    if A.dim != B.dim:
        raise UsageError(f"dimension mismatch: {A.dim} vs {B.dim}")
    tol = 1e-9 if cfg.tol is None else cfg.tol
    ab = includes(A, B, tol)
    ba = includes(B, A, tol)
    print(f"A includes B: {bool(ab)} (margin {ab.margin:.3e})", file=out)
    print(f"B includes A: {bool(ba)} (margin {ba.margin:.3e})", file=out)
    for name, inc in (("B", ab), ("A", ba)):
        if not inc:
            print(f"  worst vertex of {name} outside: {list(map(float, inc.violator))}", file=out)
    expect = cfg.options.get("expect")
    ok = {None: True, "includes": bool(ab), "included": bool(ba),
          "equal": bool(ab) and bool(ba)}[expect]
    if expect:
        print(f"expect {expect}: {'OK' if ok else 'VIOLATED'}", file=out)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "compute-region": cmd_compute_region,
    "check-degraded": cmd_check_degraded,
    "derive-fm": cmd_derive_fm,
    "gaussian-sweep": cmd_gaussian_sweep,
    "compare-regions": cmd_compare_regions,
}


# -- argument parsing -----------------------------------------------------------

def _seed(s: str) -> int:
    return int(s, 0)


class _Parser(argparse.ArgumentParser):
    # usage errors are invalid input (exit 1); 2 is reserved for failed checks
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="brc", description="Rate regions of broadcast relay channels.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute-region", help="evaluate a region formula on a discrete channel")
    c.add_argument("--theorem", required=True, choices=sorted(EVALUATORS),
                   help="1: general inner bound; cor2: common-relay inner bound; 3: degraded "
                        "outer bound; conj1: degraded inner bound; 4: semi-degraded capacity; "
                        "marton: Marton region of the broadcast part")
    c.add_argument("--channel", required=True, help="channel JSON")
    c.add_argument("--aux", help="auxiliary spec JSON (cardinalities, budget, seed)")
    c.add_argument("--samples", type=int, help="override the number of sampled PDs")
    c.add_argument("--seed", type=_seed, default=None, help="seed (default 0xB12C)")
    c.add_argument("--workers", type=int, help="worker threads (capped by BRC_THREADS)")
    c.add_argument("--out", required=True, help="region CSV (one vertex per line)")
    c.add_argument("--json", help="also write the region with halfspaces as JSON")
    c.add_argument("--svg", help="also write an SVG plot")

    d = sub.add_parser("check-degraded", help="classify a common-relay channel")
    d.add_argument("channel", help="channel JSON")
    d.add_argument("--tol", type=float, help="Markov tolerance (default 1e-9 exact, 1e-7 float)")
    d.add_argument("--n-random", type=int, default=16, help="random inputs besides uniform")
    d.add_argument("--seed", type=_seed, default=DEFAULT_SEED)

    f = sub.add_parser("derive-fm", help="re-derive the general inner bound by FM elimination")
    f.add_argument("--dump-steps", metavar="DIR", help="write each elimination stage to DIR")
    f.add_argument("--drop", action="append", default=[], metavar="LABEL",
                   help="remove a constraint family (e.g. cover-direct, relay-dec.1) before "
                        "eliminating")
    f.add_argument("--audit", action="store_true",
                   help="test extra derived rows against the stated region on sampled PDs")
    f.add_argument("--timing", action="store_true", help="print the elimination runtime")

    g = sub.add_parser("gaussian-sweep", help="degraded Gaussian BRC-CR capacity region")
    for name, hlp in (("P", "source power"), ("P1", "relay power"), ("N1", "noise at user 1"),
                      ("N2", "noise at user 2"), ("Nr", "noise at the relay")):
        g.add_argument(f"--{name}", type=float, default=1.0, help=f"{hlp} (default 1)")
    g.add_argument("--grid", type=int, default=26, help="points per axis of alpha, beta, gamma")
    g.add_argument("--workers", type=int, help="worker threads (capped by BRC_THREADS)")
    g.add_argument("--out", required=True, help="region CSV")
    g.add_argument("--json", help="also write region JSON")
    g.add_argument("--svg", help="also write an SVG plot")

    r = sub.add_parser("compare-regions", help="inclusion test between two region files")
    r.add_argument("a", help="region CSV or JSON")
    r.add_argument("b", help="region CSV or JSON")
    r.add_argument("--expect", choices=("includes", "included", "equal"),
                   help="exit 2 unless A includes B / B includes A / both")
    r.add_argument("--tol", type=float, help="vertex margin tolerance (default 1e-9)")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cmd = args.command
    outputs = {}
    for key, attr in (("csv", "out"), ("json", "json"), ("svg", "svg"), ("steps", "dump_steps")):
        v = getattr(args, attr, None)
        if v:
            outputs[key] = v
    if cmd == "compute-region":
        inputs = [args.channel] + ([args.aux] if args.aux else [])
        aux = None
        if args.aux:
            if not Path(args.aux).exists():
                raise UsageError(f"input file not found: {args.aux}")
            try:
                aux = AuxSpec.from_json(_load_json(args.aux))
            except (TypeError, ValueError) as exc:
                raise UsageError(f"{args.aux}: {exc}") from None
        aux = aux or AuxSpec()
        kw = aux.to_json()
        if args.seed is not None:
            kw["seed"] = args.seed
        if args.samples is not None:
            kw["samples"] = args.samples
        try:
            aux = AuxSpec.from_json(kw)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return RunConfig(cmd, inputs, aux, None, aux.seed, outputs, args.workers,
                         {"theorem": args.theorem})
    if cmd == "check-degraded":
        return RunConfig(cmd, [args.channel], None, args.tol, args.seed, outputs,
                         options={"n_random": args.n_random})
    if cmd == "derive-fm":
        return RunConfig(cmd, [], outputs=outputs,
                         options={"drop": tuple(args.drop), "audit": args.audit,
                                  "timing": args.timing})
    if cmd == "gaussian-sweep":
        return RunConfig(cmd, [], outputs=outputs, workers=args.workers,
                         options={k: getattr(args, k) for k in ("P", "P1", "N1", "N2", "Nr",
                                                                 "grid")})
    return RunConfig(cmd, [args.a, args.b], tol=args.tol, options={"expect": args.expect})


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    return COMMANDS[cfg.command](cfg, out)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:   # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(config_from_args(args))
    except (UsageError, RegionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
