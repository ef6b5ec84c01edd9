"""Canonical byte-level serialization of run reports, traces and batch summaries."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .sim import Metrics, RunResult, TickEvent


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


@dataclass(frozen=True)
class RunReport:
    name: str
    seed: int
    metrics: Metrics
    ledger: list[dict]

    @classmethod
    def from_result(cls, result: RunResult) -> RunReport:
        return cls(result.scenario.name, result.scenario.seed, result.metrics, result.world.ledger.snapshot())

    def to_dict(self) -> dict:
        m = self.metrics
        return {
            "name": self.name,
            "seed": self.seed,
            "collisions": m.collisions,
            "violations": m.violations,
            "sanctions": m.sanctions,
            "deadlocks": m.deadlocks,
            "vehicles_exited": m.vehicles_exited,
            "throughput": m.throughput,
            "per_vehicle": [
                {
                    "id": v.id,
                    "exit_tick": v.exit_tick,
                    "delay_ticks": v.delay_ticks,
                    "violations": v.violations,
                    "fines": v.fines,
                    "reputation": v.reputation,
                }
                for v in sorted(m.per_vehicle, key=lambda v: v.id)
            ],
            "ledger": sorted(self.ledger, key=lambda a: a["id"]),
        }


CSV_COLUMNS = ("scenario", "id", "exit_tick", "delay_ticks", "violations", "fines", "reputation")


def write_metrics(report: RunReport, format: str = "json") -> bytes:
    if format == "json":
        return (_dumps(report.to_dict()) + "\n").encode()
    if format != "csv":
        raise ValueError(f"unknown metrics format {format!r}")
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(CSV_COLUMNS)
    per = sorted(report.metrics.per_vehicle, key=lambda v: v.id)
    blank = lambda v: "" if v is None else v  # noqa: E731
    for v in per:
        out.writerow([report.name, v.id, blank(v.exit_tick), blank(v.delay_ticks), v.violations, v.fines, v.reputation])
    out.writerow(
        [
            report.name,
            "TOTAL",
            report.metrics.vehicles_exited,
            sum(v.delay_ticks for v in per if v.delay_ticks is not None),
            report.metrics.violations,
            sum(v.fines for v in per),
            sum(v.reputation for v in per),
        ]
    )
    return buf.getvalue().encode()


def write_trace(events: Iterable[TickEvent], vehicles_per_tick: Sequence[list[dict]]) -> bytes:
    """JSON Lines, one object per tick with sorted vehicle states and ordered events."""
    by_tick: dict[int, list[TickEvent]] = {}
    for e in events:
        by_tick.setdefault(e.tick, []).append(e)
    lines = []
    for tick, vehicles in enumerate(vehicles_per_tick):
        evs = sorted(by_tick.get(tick, []), key=TickEvent.sort_key)
        lines.append(
            _dumps(
                {
                    "tick": tick,
                    "vehicles": sorted(vehicles, key=lambda v: v["id"]),
                    "events": [e.to_dict() for e in evs],
                }
            )
        )
    return "".join(line + "\n" for line in lines).encode()


SUMMARY_COLUMNS = ("name", "seed", "collisions", "violations", "sanctions", "deadlocks", "vehicles_exited", "throughput")


def write_summary(reports: Iterable[RunReport]) -> bytes:
    """Batch table, one row per scenario ordered by name, independent of completion order."""
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(SUMMARY_COLUMNS)
    for r in sorted(reports, key=lambda r: (r.name, r.seed)):
        d = r.to_dict()
        out.writerow([d[c] for c in SUMMARY_COLUMNS])
    return buf.getvalue().encode()
