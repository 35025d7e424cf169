"""Command-line entry point.

Exit codes: 0 success, 1 validation/usage failure, 2 invariant violation,
3 golden mismatch.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import shutil
import sys
from pathlib import Path

from . import catalog
from .engine import run_scenario
from .errors import ScenarioError, SimError, SimInvariantError, TraceFormatError
from .scenario import load_scenario, validate_scenario
from .trace import diff_traces, load_trace, write_trace

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INVARIANT = 2
EXIT_GOLDEN_MISMATCH = 3


def _resolve_scenario_path(value: str, bundled: bool) -> Path:
    if bundled:
        return catalog.bundled_scenario_path(value)
    return Path(value)


def cmd_validate(args) -> int:
    path = _resolve_scenario_path(args.scenario, args.bundled)
    if not path.exists():
        print(f"error: no such file: {path}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        scenario = load_scenario(path)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    problems = validate_scenario(scenario)
    if problems:
        for problem in problems:
            print(f"violation: {problem}")
        return EXIT_VALIDATION
    print("OK")
    return EXIT_OK


def _run_one(path: Path, args) -> int:
    try:
        scenario = load_scenario(path)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    check = None
    if args.check_invariants is not None:
        check = args.check_invariants
    try:
        result = run_scenario(scenario, seed=args.seed, check_invariants=check)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SimInvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    trace_out = Path(args.trace_out) if args.trace_out else Path(
        f"{path.stem}.trace"
    )
    metrics_out = Path(args.metrics_out) if args.metrics_out else Path(
        f"{path.stem}.metrics.csv"
    )
    write_trace(trace_out, result.trace)
    metrics_out.write_text(result.metrics_csv, encoding="utf-8")
    print(
        f"{path.name}: {len(result.trace)} events, "
        f"{len(result.outcomes)} case(s) -> {trace_out}, {metrics_out}"
    )
    return EXIT_OK


def cmd_run(args) -> int:
    paths = [
        _resolve_scenario_path(value, args.bundled) for value in args.scenario
    ]
    if len(paths) > 1 and (args.trace_out or args.metrics_out):
        print(
            "error: --trace-out/--metrics-out require a single scenario",
            file=sys.stderr,
        )
        return EXIT_VALIDATION
    if args.jobs > 1 and len(paths) > 1:
        # Runs share no mutable state, so sweeps parallelize freely.
        with concurrent.futures.ProcessPoolExecutor(args.jobs) as pool:
            codes = list(pool.map(_run_one_star, [(p, args) for p in paths]))
        return max(codes)
    codes = [_run_one(path, args) for path in paths]
    return max(codes)


def _run_one_star(pair):
    return _run_one(*pair)


def cmd_diff_golden(args) -> int:
    try:
        actual = load_trace(args.trace)
        golden = load_trace(args.golden)
    except (TraceFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    divergence = diff_traces(actual, golden)
    if divergence is None:
        print("traces match")
        return EXIT_OK
    line_no, detail = divergence
    print(f"divergence at line {line_no}: {detail}")
    return EXIT_GOLDEN_MISMATCH


def cmd_regen_golden(args) -> int:
    """Re-run every bundled case scenario and rewrite its golden trace."""
    out_dir = Path(args.out) if args.out else catalog.golden_dir()
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in catalog.BUNDLED_CASE_NAMES:
        scenario = load_scenario(catalog.bundled_scenario_path(name))
        result = run_scenario(scenario)
        golden = out_dir / f"{name}.trace"
        write_trace(golden, result.trace)
        print(f"wrote {golden} ({len(result.trace)} events)")
    return EXIT_OK


def cmd_scenarios(args) -> int:
    if args.export:
        target = Path(args.export)
        target.mkdir(parents=True, exist_ok=True)
        for path in sorted(catalog.scenario_dir().glob("*.yaml")):
            shutil.copy(path, target / path.name)
            print(f"exported {target / path.name}")
        return EXIT_OK
    for path in sorted(catalog.scenario_dir().glob("*.yaml")):
        print(path.stem)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sliceswitch",
        description="Deterministic simulator of 5G inter-slice switching",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a scenario file")
    p_validate.add_argument("scenario")
    p_validate.add_argument(
        "--bundled", action="store_true",
        help="treat the argument as a bundled scenario name",
    )
    p_validate.set_defaults(func=cmd_validate)

    p_run = sub.add_parser("run", help="run one or more scenarios")
    p_run.add_argument("scenario", nargs="+")
    p_run.add_argument("--bundled", action="store_true",
                       help="treat arguments as bundled scenario names")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--trace-out")
    p_run.add_argument("--metrics-out")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument(
        "--check-invariants", dest="check_invariants",
        action="store_true", default=None,
    )
    p_run.add_argument(
        "--no-check-invariants", dest="check_invariants", action="store_false"
    )
    p_run.set_defaults(func=cmd_run)

    p_diff = sub.add_parser(
        "diff-golden",
        help="compare a trace against a golden (timestamps ignored)",
    )
    p_diff.add_argument("trace")
    p_diff.add_argument("golden")
    p_diff.set_defaults(func=cmd_diff_golden)

    p_regen = sub.add_parser(
        "regen-golden", help="regenerate golden traces for the bundled cases"
    )
    p_regen.add_argument("--out", help="target directory (default: bundled)")
    p_regen.set_defaults(func=cmd_regen_golden)

    p_scen = sub.add_parser("scenarios", help="list or export bundled scenarios")
    p_scen.add_argument("--export", help="copy bundled scenarios to a directory")
    p_scen.set_defaults(func=cmd_scenarios)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT if isinstance(exc, SimInvariantError) else 1


if __name__ == "__main__":
    sys.exit(main())
