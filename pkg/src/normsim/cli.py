"""Command-line entry points: ``run``, ``batch`` and ``validate``.

Exit codes: 0 success, 1 invalid scenario or arguments, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import NormSimError, ScenarioError
from .output import RunReport, write_metrics, write_summary, write_trace
from .scenario import Scenario, load_scenario
from .sim import run

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="normsim", description="Normative intersection simulator.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p_run = sub.add_parser("run", help="simulate one scenario")
    p_run.add_argument("scenario", type=Path)
    p_run.add_argument("--seed", type=int, help="override the scenario seed")
    p_run.add_argument("--metrics", default="-", help="metrics output path, '-' for stdout (default)")
    p_run.add_argument("--trace", help="trace output path (JSON Lines), '-' for stdout")
    p_run.add_argument("--format", choices=("json", "csv"), default="json")

    p_batch = sub.add_parser("batch", help="simulate many scenarios and print a summary table")
    p_batch.add_argument("paths", nargs="+", type=Path, help="scenario files or directories of *.json")
    p_batch.add_argument("--parallel", type=int, default=1)
    p_batch.add_argument("--out", type=Path, help="directory for per-scenario metrics and summary.csv")

    p_val = sub.add_parser("validate", help="check a scenario file")
    p_val.add_argument("scenario", type=Path)
    return parser


def _emit(path: str | None, data: bytes) -> None:
    if path is None:
        return
    if path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(path).write_bytes(data)


def _load(path: Path) -> Scenario:
    try:
        return load_scenario(path)
    except OSError as e:
        raise ScenarioError([]) from e


def _report_diagnostics(path: Path, err: ScenarioError) -> None:
    if not err.diagnostics:
        cause = err.__cause__
        print(f"{path}: cannot read scenario: {cause}", file=sys.stderr)
    for d in err.diagnostics:
        print(f"{path}: {d}", file=sys.stderr)


def _run_report(scenario: Scenario) -> RunReport:
    return RunReport.from_result(run(scenario))


def _cmd_run(args) -> int:
    try:
        scenario = _load(args.scenario)
    except ScenarioError as e:
        _report_diagnostics(args.scenario, e)
        return EXIT_INVALID
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            print("--seed must be an unsigned 64-bit integer", file=sys.stderr)
            return EXIT_INVALID
        scenario = dataclasses.replace(scenario, seed=args.seed)
    try:
        result = run(scenario)
        _emit(args.trace, write_trace(result.events, result.snapshots))
        _emit(args.metrics, write_metrics(RunReport.from_result(result), args.format))
    except (NormSimError, OSError) as e:
        print(f"runtime failure: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _expand(paths: list[Path]) -> list[Path]:
    out = []
    for p in paths:
        out.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    return out


def _cmd_batch(args) -> int:
    if args.parallel < 1:
        print("--parallel must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    scenarios = []
    failed = False
    for path in _expand(args.paths):
        try:
            scenarios.append(_load(path))
        except ScenarioError as e:
            _report_diagnostics(path, e)
            failed = True
    if failed:
        return EXIT_INVALID
    names = [s.name for s in scenarios]
    if args.out and len(set(names)) != len(names):
        print("scenario names must be unique when writing --out", file=sys.stderr)
        return EXIT_INVALID

    try:
        if args.parallel > 1 and len(scenarios) > 1:
            with ProcessPoolExecutor(max_workers=args.parallel) as pool:
                reports = list(pool.map(_run_report, scenarios))
        else:
            reports = [_run_report(s) for s in scenarios]
        summary = write_summary(reports)
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            for r in reports:
                (args.out / f"{r.name}.metrics.json").write_bytes(write_metrics(r))
            (args.out / "summary.csv").write_bytes(summary)
    except (NormSimError, OSError) as e:
        print(f"runtime failure: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    _emit("-", summary)
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        scenario = _load(args.scenario)
    except ScenarioError as e:
        _report_diagnostics(args.scenario, e)
        return EXIT_INVALID
    print(f"ok: {scenario.name} ({len(scenario.vehicles)} vehicles)")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_INVALID
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    return {"run": _cmd_run, "batch": _cmd_batch, "validate": _cmd_validate}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
