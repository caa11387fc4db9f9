"""Command line: ``python -m shepherd_de run|reproduce``.

Exit codes: 0 when every episode finished inside the goal, 1 when some
episode ran out of steps, 2 on an invalid scenario or argument.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

from .harness import TABLES, ScenarioError, bundled_scenario, emit_outputs, load_scenario, run_batch
from .planner import ALGORITHMS

log = logging.getLogger("shepherd_de")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shepherd_de", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario file")
    run.add_argument("--scenario", required=True, help="scenario JSON file")
    run.add_argument("--algorithm", choices=ALGORITHMS)
    run.add_argument("--seeds", type=_positive, help="number of runs (overrides n_runs)")
    run.add_argument("--base-seed", type=_non_negative)
    run.add_argument("--trace", action="store_true", help="write trace_<seed>.jsonl files")
    run.add_argument("--out", default="out")

    rep = sub.add_parser("reproduce", help="run a bundled experiment matrix")
    rep.add_argument("--table", type=int, choices=sorted(TABLES), required=True)
    rep.add_argument("--seeds", type=_positive, help="runs per scenario (default: the fixture's n_runs)")
    rep.add_argument("--base-seed", type=_non_negative)
    rep.add_argument("--text-sizes", action="store_true",
                     help="table 2: use 80 sheep instead of 60 for the 13-obstacle block")
    rep.add_argument("--out", default="out")
    return parser


def _print_row(m) -> None:
    print(f"{m.scenario:<20} {m.algorithm:<9} success {m.success_rate:6.1%}  "
          f"best {m.best:7.1f}  mean {m.mean:8.2f}  std {m.std:7.2f}", flush=True)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    try:
        if args.command == "run":
            config = load_scenario(args.scenario).with_overrides(n_runs=args.seeds, base_seed=args.base_seed)
            jobs = [(config, args.algorithm or config.algorithm)]
        else:
            names, algorithms = TABLES[args.table]
            if args.table == 2 and args.text_sizes:
                names = tuple(n.replace("13large_n60", "13large_n80") for n in names)
            configs = [bundled_scenario(n).with_overrides(n_runs=args.seeds, base_seed=args.base_seed)
                       for n in names]
            jobs = [(c, a) for c in configs for a in algorithms]
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    results = []
    for config, algorithm in jobs:
        t0 = time.perf_counter()
        metrics = run_batch(config, algorithm, trace=getattr(args, "trace", False))
        log.info("%s/%s done in %.1f s", config.name, algorithm, time.perf_counter() - t0)
        _print_row(metrics)
        results.append(metrics)

    try:
        paths = emit_outputs(results, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {paths[0]}" + (f" and {len(paths) - 1} trace files" if len(paths) > 1 else ""))
    return 0 if all(all(m.successes) for m in results) else 1
