"""Command-line front end.

    python -m sepscope rm-pure ghz:4 --m 2
    python -m sepscope rm-bound bbo:0,1 --m 4 --symmetry v4
    python -m sepscope sweep --steps 101 --out sweep.csv --threads 8
    python -m sepscope partitions 4 2 --symmetry v4
    python -m sepscope validate chain --seed 7
    python -m sepscope state werner:0.5 --exact

JSON and CSV payloads go to stdout (or --out); progress and errors go to stderr.
Exit codes: 0 ok, 1 violation found, 2 usage or parse error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from typing import Sequence

from . import config
from .core.partitions import (
    SitePermutation,
    complement,
    load_group,
    nonempty_subsets,
    orbit_reduce,
    proper_subsets,
    set_partitions,
    stirling,
    vierergruppe,
)
from .core.tensor_core import SystemShape, state_to_dict
from .errors import IoError, ParseError, SepscopeError
from .experiments.sweep import check_structure, run_sweep, write_sweep_csv
from .measures.mixed import BoundVariant, fastpath_campaign, report_to_dict, rm_bound, witness_trace_rows
from .measures.pure import DEFAULT_CONFIG, calibrate_eta, rm_pure_report
from .measures.roof import run_chain_campaign
from .observability import configure
from .states.spec_parser import as_density, as_pure, parse_state

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_VIOLATION = 0, 1


def parse_symmetry(text: str | None) -> list[SitePermutation] | None:
    if text is None or text == "none":
        return None
    if text == "v4":
        return vierergruppe()
    if text.startswith("file:"):
        return load_group(text[len("file:"):])
    raise ParseError(f"unknown symmetry '{text}' (expected none, v4 or file:<path>)")


def _emit(payload: dict, out: str | None = None) -> None:
    text = json.dumps(payload, indent=2)
    if out is None:
        print(text)
        return
    try:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {out}: {exc}") from exc


# --- Commands ---

def cmd_rm_pure(args) -> int:
    psi = as_pure(parse_state(args.state), args.state)
    _emit(rm_pure_report(psi, args.m), args.out)
    return EXIT_OK


def cmd_rm_bound(args) -> int:
    rho = as_density(parse_state(args.state))
    report = rm_bound(rho, args.m, args.variant, parse_symmetry(args.symmetry))
    _emit(report_to_dict(report), args.out)

    if args.trace:
        fields = ["gamma", "delta", "assignment", "j", "lambda1", "lambda_sum"]
        try:
            with open(args.trace, "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
                writer.writeheader()
                for gamma in proper_subsets(rho.shape.n):
                    for delta in nonempty_subsets(complement(gamma, rho.shape.n)):
                        writer.writerows(witness_trace_rows(rho, gamma, delta))
        except OSError as exc:
            raise IoError(f"cannot write trace to {args.trace}: {exc}") from exc
        print(f"🔍 Witness trace written to {args.trace}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    grid = run_sweep(
        p1_steps=args.steps,
        p2_steps=args.p2_steps,
        ms=args.m,
        variant=args.variant,
        threads=args.threads,
        symmetry=parse_symmetry(args.symmetry),
    )
    write_sweep_csv(grid, args.out if args.out else sys.stdout)
    structure = check_structure(grid)
    print(json.dumps(structure.to_dict()), file=sys.stderr)
    if args.out:
        print(f"✅ {len(grid.rows)} rows written to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_partitions(args) -> int:
    parts = set_partitions(args.n, args.m)
    payload = {"n": args.n, "m": args.m, "count": len(parts), "stirling": stirling(args.n, args.m)}
    group = parse_symmetry(args.symmetry)
    if group:
        table = orbit_reduce(parts, group)
        payload["orbits"] = table.to_json()
    else:
        payload["partitions"] = [p.to_json() for p in parts]
    _emit(payload, args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.campaign == "chain":
        report = run_chain_campaign(variant=args.variant, trials=args.trials, seed=args.seed)
        _emit(report.to_dict(), args.out)
        return EXIT_OK if report.ok else EXIT_VIOLATION

    if args.campaign == "calibration":
        cfg = calibrate_eta(samples=args.samples, seed=args.seed)
        matches = (
            cfg.reading is DEFAULT_CONFIG.reading
            and abs(cfg.calibration_factor - DEFAULT_CONFIG.calibration_factor) <= 1e-8
            and not cfg.size_factors
        )
        _emit({"calibrated": cfg.to_dict(), "pinned": DEFAULT_CONFIG.to_dict(), "matches_pinned": matches}, args.out)
        return EXIT_OK if matches else EXIT_VIOLATION

    if args.campaign == "fastpath":
        report = fastpath_campaign(pairs=args.pairs, shape=SystemShape(4), seed=args.seed)
        _emit(report, args.out)
        return EXIT_OK if report["ok"] else EXIT_VIOLATION

    # structure
    grid = run_sweep(p1_steps=args.steps, variant=args.variant, threads=args.threads, symmetry=vierergruppe())
    structure = check_structure(grid)
    _emit({"steps": args.steps, "variant": grid.variant.value, **structure.to_dict()}, args.out)
    return EXIT_OK if structure.ok else EXIT_VIOLATION


def cmd_state(args) -> int:
    _emit(state_to_dict(parse_state(args.state), exact=args.exact), args.out)
    return EXIT_OK


# --- Parser ---

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sepscope", description="Multipartite entanglement measures R_m and their computable lower bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    variants = [v.value for v in BoundVariant]

    def add_out(p):
        p.add_argument("--out", help="Write the payload to this file instead of stdout")

    p = sub.add_parser("rm-pure", help="R_m of a pure state with per-partition breakdown")
    p.add_argument("state", help="State spec, e.g. ghz:4")
    p.add_argument("--m", type=int, default=2)
    add_out(p)
    p.set_defaults(func=cmd_rm_pure)

    p = sub.add_parser("rm-bound", help="Lower bound R~_m of a (mixed) state")
    p.add_argument("state", help="State spec, e.g. bbo:0.2,0.5")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--variant", choices=variants, default=BoundVariant.QUADRATURE.value)
    p.add_argument("--symmetry", default="none", help="none | v4 | file:<json>")
    p.add_argument("--trace", metavar="CSV", help="Dump per-witness (lambda1, sum lambda) rows to this file")
    add_out(p)
    p.set_defaults(func=cmd_rm_bound)

    p = sub.add_parser("sweep", help="R~_m grid over the four-qubit noise family as CSV")
    p.add_argument("--steps", type=int, default=101, help="Grid steps along p1 (and p2 unless --p2-steps)")
    p.add_argument("--p2-steps", type=int, help="Grid steps along p2")
    p.add_argument("--m", type=int, nargs="+", default=[2, 3, 4])
    p.add_argument("--variant", choices=variants, default=BoundVariant.QUADRATURE.value)
    p.add_argument("--symmetry", default="v4", help="none | v4")
    p.add_argument("--threads", type=int, default=config.THREADS)
    add_out(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("partitions", help="List m-block partitions of n sites or their orbits")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--symmetry", default="none", help="none | v4 | file:<json>")
    add_out(p)
    p.set_defaults(func=cmd_partitions)

    p = sub.add_parser("validate", help="Run a validation campaign")
    p.add_argument("campaign", choices=["chain", "calibration", "fastpath", "structure"])
    p.add_argument("--seed", type=int, default=config.SEED)
    p.add_argument("--variant", choices=variants, default=BoundVariant.QUADRATURE.value)
    p.add_argument("--trials", type=int, default=500, help="Roof trials per state (chain)")
    p.add_argument("--samples", type=int, default=100, help="Random states per shape (calibration)")
    p.add_argument("--pairs", type=int, default=1000, help="Random (state, witness) pairs (fastpath)")
    p.add_argument("--steps", type=int, default=21, help="Grid steps per axis (structure)")
    p.add_argument("--threads", type=int, default=config.THREADS)
    add_out(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("state", help="Dump a built state as JSON")
    p.add_argument("state")
    p.add_argument("--exact", action="store_true", help="Full-precision decimal strings")
    add_out(p)
    p.set_defaults(func=cmd_state)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    configure()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SepscopeError as exc:
        logger.error("❌ %s: %s", type(exc).__name__, exc)
        return exc.exit_code
