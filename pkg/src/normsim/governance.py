"""Testimony-based monitoring: witnesses, sanctions, the fine ledger and deadlock arbitration."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, NamedTuple

from .errors import NormSimError
from .norms import Violation


@dataclass(frozen=True)
class Testimony:
    tick: int
    witness: str
    violator: str
    norm_id: str
    violation_tick: int

    def refers_to(self, v: Violation) -> bool:
        return (self.violator, self.norm_id, self.violation_tick) == (v.violator, v.norm_id, v.tick)


@dataclass(frozen=True)
class SanctionRecord:
    sanction_id: str
    violator: str
    norm_id: str
    fine: float
    testimony_count: int
    tick: int

    def to_dict(self) -> dict:
        return {
            "sanction_id": self.sanction_id,
            "violator": self.violator,
            "norm": self.norm_id,
            "fine": self.fine,
            "testimonies": self.testimony_count,
            "tick": self.tick,
        }


def sanction_id(violator: str, tick: int, norm_id: str) -> str:
    return f"{violator}@{tick}:{norm_id}"


@dataclass
class AgentRecord:
    total_fines: float = 0
    reputation: int = 0
    history: list[SanctionRecord] = field(default_factory=list)


class GovernanceLedger:
    """Append-only per-agent record of sanctions, fines and reputation."""

    def __init__(self):
        self._agents: dict[str, AgentRecord] = {}
        self._ids: set[str] = set()

    def __contains__(self, sid: str) -> bool:
        return sid in self._ids

    def agent(self, vehicle_id: str) -> AgentRecord:
        return self._agents.get(vehicle_id, AgentRecord())

    def agents(self) -> list[str]:
        return sorted(self._agents)

    def apply(self, s: SanctionRecord) -> None:
        if s.sanction_id in self._ids:
            raise NormSimError("E_DUP_SANCTION", f"sanction {s.sanction_id} already applied")
        rec = self._agents.setdefault(s.violator, AgentRecord())
        rec.total_fines += s.fine
        rec.reputation -= 1
        rec.history.append(s)
        self._ids.add(s.sanction_id)

    def snapshot(self) -> list[dict]:
        return [
            {
                "id": vid,
                "total_fines": rec.total_fines,
                "reputation": rec.reputation,
                "history": [s.to_dict() for s in rec.history],
            }
            for vid, rec in sorted(self._agents.items())
        ]


def apply_sanction(ledger: GovernanceLedger, s: SanctionRecord) -> GovernanceLedger:
    """Copy of ``ledger`` with ``s`` applied; the original is never touched."""
    out = copy.deepcopy(ledger)
    out.apply(s)
    return out


def collect_testimonies(v: Violation, positions: Mapping[str, float], radius_m: float) -> list[Testimony]:
    """One testimony per other contender within ``radius_m`` of the junction.

    ``positions`` maps contender id to its distance from the stop line (0 inside the box).
    """
    return [
        Testimony(v.tick, vid, v.violator, v.norm_id, v.tick)
        for vid, dist in sorted(positions.items())
        if vid != v.violator and dist <= radius_m
    ]


def adjudicate(
    v: Violation, testimonies: Iterable[Testimony], threshold: int, fines: Mapping[str, float]
) -> SanctionRecord | None:
    ts = list(testimonies)
    for t in ts:
        if not t.refers_to(v):
            raise NormSimError("E_TESTIMONY_MISMATCH", f"testimony by {t.witness} is about another violation")
    if len(ts) < threshold:
        return None
    return SanctionRecord(
        sanction_id(v.violator, v.tick, v.norm_id), v.violator, v.norm_id, fines[v.norm_id], len(ts), v.tick
    )


class PolicyKind(str, Enum):
    NONE = "none"
    FCFS_ARBITRATION = "fcfs_arbitration"


@dataclass(frozen=True)
class DeadlockPolicy:
    kind: PolicyKind = PolicyKind.NONE
    timeout_ticks: int = 20

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        if self.timeout_ticks < 1:
            raise NormSimError("E_BAD_VALUE", "deadlock timeout must be >= 1 tick")


class CycleMember(NamedTuple):
    vehicle_id: str
    arrival_tick: int
    bearing: int


def arbitrate_deadlock(cycle: Iterable[CycleMember], policy: DeadlockPolicy) -> str | None:
    """Vehicle allowed to break a deadlock: earliest arrival, then smallest bearing."""
    members = list(cycle)
    if not members:
        raise NormSimError("E_EMPTY_CYCLE", "nothing to arbitrate")
    if policy.kind is PolicyKind.NONE:
        return None
    return min(members, key=lambda m: (m.arrival_tick, m.bearing, m.vehicle_id)).vehicle_id
