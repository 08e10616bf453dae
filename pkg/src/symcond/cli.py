"""Command line entry point: ``symcond {cond,ratio-experiment,bench,verify}``.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .condition import (
    FastPathUnavailable,
    SvdFailure,
    condition_psrd_fast,
    condition_segre,
    condition_segre_veronese,
    condition_veronese,
    condition_waring_fast,
)
from .experiments import ExperimentConfig, ratio_experiment, speed_benchmark, summary_path
from .io import load_decomposition
from .terracini import PsrdDecomposition, WaringDecomposition
from .verify import verify_suite

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("symcond")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _to_waring(dec) -> WaringDecomposition:
    if isinstance(dec, WaringDecomposition):
        return dec
    if dec.K != 1:
        raise UsageError("the Veronese manifold needs a single symmetric group; use --manifold segre-veronese")
    return WaringDecomposition.from_arrays(dec.weights, dec.factor(0), dec.degrees[0])


def _to_psrd(dec, manifold: str) -> PsrdDecomposition:
    if isinstance(dec, WaringDecomposition):
        return dec.as_cpd() if manifold == "segre" else dec.as_psrd()
    return dec.as_cpd() if manifold == "segre" else dec


def cmd_cond(args) -> int:
    dec = load_decomposition(args.file)
    if args.manifold == "veronese":
        target = _to_waring(dec)
        direct, fast = condition_veronese, condition_waring_fast
    elif args.manifold == "segre" and isinstance(dec, WaringDecomposition) and not args.fast:
        target = dec
        direct, fast = condition_segre, None
    else:
        # Segre is the Segre-Veronese manifold with every degree equal to one
        target = _to_psrd(dec, args.manifold)
        direct, fast = condition_segre_veronese, condition_psrd_fast
    report = None
    if args.fast:
        try:
            report = fast(target)
        except FastPathUnavailable as exc:
            log.warning("%s; falling back to the direct path", exc)
    if report is None:
        report = direct(target)
    out = report.as_dict()
    out["manifold"] = args.manifold
    print(json.dumps(out))
    return EXIT_OK


def cmd_ratio(args) -> int:
    cfg = ExperimentConfig(
        n_min=args.n_min, n_max=args.n_max, D=args.D, trials=args.trials,
        seed=args.seed, fixed_rank=args.rank, output_path=Path(args.out),
    )
    start = time.perf_counter()
    records, summary = ratio_experiment(cfg, jobs=args.jobs)
    finite = [r.ratio for r in records if r.finite]
    print(f"wrote {len(records)} records to {cfg.output_path} and {len(summary)} rows to {summary_path(cfg.output_path)}")
    if finite:
        print(f"max ratio {max(finite)!r}  min ratio {min(finite)!r}  "
              f"non-finite trials {len(records) - len(finite)}  elapsed {time.perf_counter() - start:.1f}s")
    return EXIT_OK


def cmd_bench(args) -> int:
    result = speed_benchmark(args.n, args.D, args.R, seed=args.seed, reps=args.reps)
    print(json.dumps(result))
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify_suite(seed=args.seed, cases=args.cases)
    print("\n".join(report.lines()))
    return EXIT_OK if report.ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="symcond", description="Condition numbers of CPD, Waring and Tucker-compressed Waring decompositions.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("cond", help="condition number of a decomposition stored as JSON")
    c.add_argument("file")
    c.add_argument("--manifold", choices=["segre", "veronese", "segre-veronese"], default="veronese")
    c.add_argument("--fast", action="store_true", help="use the compressed algorithm (needs n > R)")
    c.set_defaults(func=cmd_cond)

    r = sub.add_parser("ratio-experiment", help="CPD / Waring condition number ratios on random decompositions")
    r.add_argument("--n-min", type=int, default=3)
    r.add_argument("--n-max", type=int, default=10)
    r.add_argument("--D", type=int, default=3)
    r.add_argument("--trials", type=int, default=50)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--rank", type=int, default=None, help="fixed rank instead of every admissible rank")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--out", default="ratios.csv")
    r.set_defaults(func=cmd_ratio)

    b = sub.add_parser("bench", help="direct versus compressed Waring condition number timing")
    b.add_argument("--n", type=int, default=60)
    b.add_argument("--D", type=int, default=3)
    b.add_argument("--R", type=int, default=8)
    b.add_argument("--reps", type=int, default=3)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="randomized property checks")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--cases", type=int, default=25)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError, KeyError) as exc:
        print(f"symcond: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SvdFailure, MemoryError, FloatingPointError) as exc:
        print(f"symcond: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
