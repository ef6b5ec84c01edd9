"""Proceed/hold decisions for the social, pressured and rebellious compliance stances."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .errors import NormSimError
from .norms import ART38, OCCUPANCY, Contender, PrecedenceEdge
from .road import Cell


class Strategy(str, Enum):
    SOCIAL = "social"
    PRESSURED = "pressured"
    REBELLIOUS = "rebellious"


class Action(str, Enum):
    PROCEED = "proceed"
    HOLD = "hold"


@dataclass(frozen=True)
class UtilityParams:
    time_value_per_s: float = 1.0
    safety_reflex: bool = False

    def __post_init__(self):
        if self.time_value_per_s < 0:
            raise NormSimError("E_BAD_VALUE", "time_value_per_s must be >= 0")


@dataclass(frozen=True)
class AgentView:
    """What one vehicle at the stop line perceives when it decides.

    ``wait_cells`` maps every vehicle the agent must wait for (edge beneficiaries
    and conflicting crossers) to the number of cells it still has to cross.
    ``fcfs_yields`` lists conflicting vehicles with no norm between them that
    go first under the arrival-order fallback; it carries no fine.
    ``next_cells`` is what other vehicles inside the box will cover next tick.
    """

    me: Contender
    outgoing_edges: tuple[PrecedenceEdge, ...] = ()
    conflicting_crossers: frozenset[str] = frozenset()
    ped_hold: bool = False
    witnesses_in_range: int = 0
    fine_schedule: Mapping[str, float] = field(default_factory=dict)
    testimony_threshold: int = 1
    tick_seconds: float = 0.5
    wait_cells: Mapping[str, int] = field(default_factory=dict)
    fcfs_yields: frozenset[str] = frozenset()
    entry_cell: Cell | None = None
    next_cells: frozenset[Cell] = frozenset()

    def __post_init__(self):
        for e in self.outgoing_edges:
            if e.yielder != self.me.vehicle_id:
                raise NormSimError("E_BAD_VIEW", f"edge {e} does not start at {self.me.vehicle_id}")


def _norm_bound(view: AgentView) -> bool:
    return bool(view.outgoing_edges or view.conflicting_crossers or view.ped_hold)


def decide_social(view: AgentView) -> Action:
    if _norm_bound(view) or view.fcfs_yields:
        return Action.HOLD
    return Action.PROCEED


def expected_punishment(view: AgentView) -> float:
    """Largest fine at stake times the chance of conviction (0 or 1 under the testimony rule)."""
    at_stake = [view.fine_schedule.get(e.norm_id, 0) for e in view.outgoing_edges]
    if view.conflicting_crossers:
        at_stake.append(view.fine_schedule.get(OCCUPANCY, 0))
    if view.ped_hold:
        at_stake.append(view.fine_schedule.get(ART38, 0))
    if not at_stake or view.witnesses_in_range < view.testimony_threshold:
        return 0
    return max(at_stake)


def violation_gain(view: AgentView, params: UtilityParams, tick_seconds: float | None = None) -> float:
    """Value of the time saved by not waiting for the vehicles ahead in the yield order."""
    if tick_seconds is None:
        tick_seconds = view.tick_seconds
    return params.time_value_per_s * tick_seconds * sum(view.wait_cells.values())


def decide_pressured(view: AgentView, params: UtilityParams) -> Action:
    if decide_social(view) is Action.PROCEED:
        return Action.PROCEED
    if not _norm_bound(view):
        # only the arrival-order fallback holds us back: no fine to weigh, keep the order
        return Action.HOLD
    if expected_punishment(view) >= violation_gain(view, params):
        return Action.HOLD
    return Action.PROCEED


def decide_rebellious(view: AgentView, params: UtilityParams) -> Action:
    if params.safety_reflex and view.entry_cell is not None and view.entry_cell in view.next_cells:
        return Action.HOLD
    return Action.PROCEED


def decide(strategy: Strategy, view: AgentView, params: UtilityParams) -> Action:
    strategy = Strategy(strategy)
    if strategy is Strategy.SOCIAL:
        return decide_social(view)
    if strategy is Strategy.PRESSURED:
        return decide_pressured(view, params)
    return decide_rebellious(view, params)
