"""
Command line entry point: check, run, matrix, graph and compare.
"""
from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence

from isolab.harness.builtins import builtin_workload, builtin_workloads
from isolab.harness.compare import compare_levels
from isolab.harness.manifest import load_workload_file
from isolab.harness.matrix import build_matrix
from isolab.harness.search import run_level
from isolab.harness.settings import HarnessSettings
from isolab.history_core.graph import dependency_graph, is_serializable
from isolab.history_core.models import Flavor, History
from isolab.history_core.notation import format_actions, parse_history
from isolab.mvcc.sv_mapping import mv_to_sv
from isolab.phenomena.detectors import classify
from isolab.phenomena.report import render_classification, render_classification_records
from isolab.shared.constants import LevelNames, PhenomenonNames, ReportFormats, Verdicts
from isolab.shared.errors import IsolabError
from isolab.shared.logging_utils import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="isolab", description="Transaction isolation laboratory")
    parser.add_argument("--log-level", help="Logging level (default: $ISOLAB_LOG_LEVEL or WARNING)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    check = subparsers.add_parser("check", help="Classify a history and decide serializability")
    check.add_argument("--history", help="History file (default: stdin)")
    check.add_argument("--format", default=ReportFormats.TEXT, choices=ReportFormats.ALL_FORMATS)

    run = subparsers.add_parser("run", help="Run a workload on a level's engine")
    run.add_argument("--level", required=True, choices=LevelNames.ALL_LEVELS)
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--workload", help="Workload file (.txt, .yaml, .yml or .json)")
    source.add_argument("--builtin", help="Built-in workload name")
    run.add_argument("--schedule", help='Txn id per slot, e.g. "1 2 2 1" (default: the reference schedule)')

    matrix = subparsers.add_parser("matrix", help="Reproduce the possible-anomalies table")
    matrix.add_argument("--bound", type=int, help="Schedule length bound (default: $ISOLAB_SCHEDULE_BOUND or 14)")
    matrix.add_argument("--levels", nargs="+", choices=LevelNames.ALL_LEVELS)
    matrix.add_argument("--phenomena", nargs="+", choices=PhenomenonNames.MATRIX_PHENOMENA)
    matrix.add_argument("--workers", type=int, help="Parallel level surveys (default: $ISOLAB_MATRIX_WORKERS or 1)")

    graph = subparsers.add_parser("graph", help="Print the dependency graph in DOT format")
    graph.add_argument("--history", required=True, help="History file")

    compare = subparsers.add_parser("compare", help="Order two levels by the histories they allow")
    compare.add_argument("--l1", required=True, choices=LevelNames.ALL_LEVELS)
    compare.add_argument("--l2", required=True, choices=LevelNames.ALL_LEVELS)
    compare.add_argument("--bound", type=int, help="Schedule length bound")

    return parser.parse_args(argv)


def _read_history(path: str | None) -> History:
    if path is None:
        return parse_history(sys.stdin.read())
    with open(path, encoding="utf-8") as handle:
        return parse_history(handle.read())


def _single_version(history: History) -> History:
    if history.flavor is Flavor.MULTI_VERSION:
        return mv_to_sv(history)
    return history


def _serializability_line(history: History) -> str:
    serializable, cycle = is_serializable(history)
    if serializable:
        return Verdicts.SERIALIZABLE
    path = " -> ".join(f"T{txn}" for txn in cycle + cycle[:1])
    return f"{Verdicts.NON_SERIALIZABLE}: {path}"


def cmd_check(args: argparse.Namespace) -> int:
    original = _read_history(args.history)
    history = _single_version(original)
    classification = classify(history)

    if args.format == ReportFormats.RECORDS:
        lines = render_classification_records(classification)
        serializable, _ = is_serializable(history)
        lines.append(f"verdict={Verdicts.SERIALIZABLE if serializable else Verdicts.NON_SERIALIZABLE}")
    else:
        lines = [f"history: {format_actions(original.actions)}"]
        if history is not original:
            lines.append(f"single-version: {format_actions(history.actions)}")
        lines.extend(render_classification(history, classification))
        lines.append(_serializability_line(history))
    print("\n".join(lines))
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    workload = builtin_workload(args.builtin) if args.builtin else load_workload_file(args.workload)
    result = run_level(workload, args.level, args.schedule)
    print("\n".join(result.render()))
    return EXIT_OK


def cmd_matrix(args: argparse.Namespace) -> int:
    settings = HarnessSettings.from_environ().with_overrides(args.bound, args.workers)
    result = build_matrix(
        levels=args.levels,
        phenomena=args.phenomena,
        workloads=list(builtin_workloads().values()),
        bound=settings.schedule_bound,
        max_workers=settings.matrix_workers,
    )
    print("\n".join(result.render()))
    return EXIT_MISMATCH if result.mismatches() else EXIT_OK


def cmd_graph(args: argparse.Namespace) -> int:
    history = _single_version(_read_history(args.history))
    print(dependency_graph(history).to_dot())
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    settings = HarnessSettings.from_environ().with_overrides(args.bound)
    order = compare_levels(args.l1, args.l2, bound=settings.schedule_bound)
    print("\n".join(order.render()))
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "run": cmd_run,
    "matrix": cmd_matrix,
    "graph": cmd_graph,
    "compare": cmd_compare,
}


def dispatch(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand and return its exit status"""
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    setup_logging(args.log_level)
    logger.info(f"=== {args.command.upper()} ===")
    try:
        return COMMANDS[args.command](args)
    except (IsolabError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
