"""Tick-based world evolution.

Each tick runs a fixed pipeline: spawn, precedence, decisions, violations,
movement, collisions, governance, deadlock watchdog.  Decisions read only the
state left by the previous tick, so the evaluation order of agents is
irrelevant.  Vehicles cross one quadrant per tick; a crossing vehicle's body
covers its current quadrant and the one it just left.
"""

from __future__ import annotations

import copy
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, NamedTuple

from .errors import NormSimError
from .governance import (
    CycleMember,
    GovernanceLedger,
    adjudicate,
    arbitrate_deadlock,
    collect_testimonies,
)
from .norms import (
    Contender,
    ContenderPhase,
    PrecedenceGraph,
    build_precedence,
    detect_normative_deadlock,
    detect_violations,
    fine_schedule,
)
from .road import Cell, Maneuver, Movement, conflicts, exit_bearing
from .scenario import Scenario
from .strategies import Action, AgentView, Strategy, decide

EPS = 1e-9


class Phase(str, Enum):
    PENDING = "pending"
    APPROACHING = "approaching"
    AT_LINE = "at_line"
    CROSSING = "crossing"
    EXITED = "exited"
    CRASHED = "crashed"


@dataclass
class VehicleState:
    vehicle_id: str
    approach: str
    maneuver: Maneuver
    strategy: Strategy
    cells: tuple[Cell, ...]
    bearing: int
    spawn_tick: int = 0
    spawn_distance_m: float = 20.0
    phase: Phase = Phase.PENDING
    distance_m: float | None = None
    path_index: int | None = None
    arrival_tick: int | None = None
    exit_tick: int | None = None

    @property
    def in_play(self) -> bool:
        return self.phase in (Phase.APPROACHING, Phase.AT_LINE, Phase.CROSSING)

    def footprint(self) -> set[Cell]:
        """Quadrants covered this tick: the head cell and the one just left."""
        if self.phase is not Phase.CROSSING:
            return set()
        i = self.path_index
        return {self.cells[i], self.cells[i - 1]} if i > 0 else {self.cells[0]}

    def next_footprint(self) -> set[Cell]:
        if self.phase is not Phase.CROSSING or self.path_index + 1 >= len(self.cells):
            return set()
        i = self.path_index
        return {self.cells[i], self.cells[i + 1]}

    def snapshot(self) -> dict:
        d: dict = {"id": self.vehicle_id, "phase": self.phase.value}
        if self.phase is Phase.APPROACHING:
            d["distance_m"] = self.distance_m
        elif self.phase is Phase.AT_LINE:
            d["distance_m"] = 0.0
        elif self.phase is Phase.CROSSING:
            d["cell"] = self.cells[self.path_index].value
        return d


EVENT_TYPES = (
    "decision",
    "violation",
    "entered",
    "exited",
    "collision",
    "testimony",
    "sanction",
    "deadlock_detected",
    "grant",
)
_EVENT_RANK = {t: i for i, t in enumerate(EVENT_TYPES)}


@dataclass(frozen=True)
class TickEvent:
    tick: int
    type: str
    subject: str
    data: tuple[tuple[str, object], ...] = ()

    @classmethod
    def make(cls, tick: int, type: str, subject: str, **data) -> TickEvent:
        if type not in _EVENT_RANK:
            raise NormSimError("E_BAD_EVENT", type)
        return cls(tick, type, subject, tuple(data.items()))

    def __getitem__(self, key: str):
        return dict(self.data)[key]

    def get(self, key: str, default=None):
        return dict(self.data).get(key, default)

    def sort_key(self) -> tuple:
        return (_EVENT_RANK[self.type], self.subject, repr(self.data))

    def to_dict(self) -> dict:
        return {"type": self.type, **dict(self.data)}


@dataclass
class WorldState:
    scenario: Scenario
    vehicles: dict[str, VehicleState]
    tick: int = 0
    ledger: GovernanceLedger = field(default_factory=GovernanceLedger)
    held_since: dict[str, int] = field(default_factory=dict)
    granted: dict[str, int] = field(default_factory=dict)
    reported_cycles: set[tuple[str, ...]] = field(default_factory=set)
    last_graph: PrecedenceGraph | None = None
    last_actions: dict[str, Action] = field(default_factory=dict)

    @property
    def intersection(self):
        return self.scenario.intersection

    @property
    def params(self):
        return self.scenario.params

    @property
    def seed(self) -> int:
        return self.scenario.seed

    @property
    def finished(self) -> bool:
        if self.tick >= self.scenario.ticks_max:
            return True
        return all(v.phase in (Phase.EXITED, Phase.CRASHED) for v in self.vehicles.values())

    def phase_counts(self) -> dict[Phase, int]:
        counts = {p: 0 for p in Phase}
        for v in self.vehicles.values():
            counts[v.phase] += 1
        return counts


def new_world(scenario: Scenario) -> WorldState:
    x = scenario.intersection
    vehicles = {}
    for spec in scenario.vehicles:
        mv = x.movement(spec.approach, spec.maneuver)
        vehicles[spec.id] = VehicleState(
            spec.id,
            spec.approach,
            spec.maneuver,
            spec.strategy,
            mv.cells,
            mv.bearing,
            spec.spawn_tick,
            spec.spawn_distance_m,
        )
    return WorldState(scenario, vehicles)


class Collision(NamedTuple):
    cell: Cell
    vehicles: tuple[str, ...]


def detect_collisions(footprints: Mapping[str, Iterable[Cell]]) -> list[Collision]:
    """One collision per quadrant shared by two or more vehicles."""
    occupants: dict[Cell, list[str]] = defaultdict(list)
    for vid, cells in footprints.items():
        for c in set(cells):
            occupants[Cell(c)].append(vid)
    return [
        Collision(cell, tuple(sorted(vids)))
        for cell, vids in sorted(occupants.items(), key=lambda kv: kv[0].value)
        if len(vids) >= 2
    ]


def _contender(v: VehicleState, zone_m: float) -> Contender | None:
    if v.phase is Phase.AT_LINE:
        return Contender(v.vehicle_id, v.approach, v.maneuver, ContenderPhase.AT_LINE, v.arrival_tick)
    if v.phase is Phase.CROSSING:
        return Contender(v.vehicle_id, v.approach, v.maneuver, ContenderPhase.CROSSING, v.arrival_tick)
    if v.phase is Phase.APPROACHING and v.distance_m <= zone_m + EPS:
        return Contender(v.vehicle_id, v.approach, v.maneuver, ContenderPhase.APPROACHING, None)
    return None


def _remaining_cells(v: VehicleState) -> int:
    if v.phase is Phase.CROSSING:
        return len(v.cells) - v.path_index
    return len(v.cells)


def _conflict(a: VehicleState, b: VehicleState) -> bool:
    return a.bearing != b.bearing and conflicts(Movement(a.bearing, a.maneuver), Movement(b.bearing, b.maneuver))


def _view(
    w: WorldState,
    v: VehicleState,
    full: PrecedenceGraph,
    g: PrecedenceGraph,
    ped_holds: set[str],
    positions: Mapping[str, float],
    fines: Mapping[str, float],
) -> AgentView:
    p = w.params
    me = g.contenders[v.vehicle_id]
    edges = tuple(g.outgoing(v.vehicle_id))
    others = [w.vehicles[c] for c in g.contenders if c != v.vehicle_id]
    crossers = [o for o in others if o.phase is Phase.CROSSING and _conflict(v, o)]

    wait = {e.beneficiary: _remaining_cells(w.vehicles[e.beneficiary]) for e in edges}
    wait.update({o.vehicle_id: _remaining_cells(o) for o in crossers})

    # arrival-order fallback for conflicting pairs no norm orders; only yield to
    # vehicles that are themselves free of must-yield edges
    mine = (v.arrival_tick, v.bearing)
    fcfs = frozenset(
        o.vehicle_id
        for o in others
        if o.phase is Phase.AT_LINE
        and _conflict(v, o)
        and full.edge_between(v.vehicle_id, o.vehicle_id) is None
        and not g.outgoing(o.vehicle_id)
        and (o.arrival_tick, o.bearing) < mine
    )
    next_cells: set[Cell] = set()
    for o in others:
        next_cells |= o.next_footprint()
    witnesses = sum(1 for vid, d in positions.items() if vid != v.vehicle_id and d <= p.perception_radius_m + EPS)
    return AgentView(
        me=me,
        outgoing_edges=edges,
        conflicting_crossers=frozenset(o.vehicle_id for o in crossers),
        ped_hold=v.vehicle_id in ped_holds,
        witnesses_in_range=witnesses,
        fine_schedule=fines,
        testimony_threshold=p.testimony_threshold,
        tick_seconds=p.tick_seconds,
        wait_cells=wait,
        fcfs_yields=fcfs,
        entry_cell=v.cells[0],
        next_cells=frozenset(next_cells),
    )


def advance(w: WorldState) -> list[TickEvent]:
    """Run one tick in place and return its events in canonical order."""
    if w.finished:
        raise NormSimError("E_FINISHED", f"world finished at tick {w.tick}")
    t = w.tick
    s = w.scenario
    p = s.params
    x = s.intersection
    norms = s.norms()
    fines = fine_schedule(norms)
    events: list[TickEvent] = []
    ordered = [w.vehicles[k] for k in sorted(w.vehicles)]

    # 1. spawn
    for v in ordered:
        if v.phase is Phase.PENDING and v.spawn_tick <= t:
            v.phase = Phase.APPROACHING
            v.distance_m = v.spawn_distance_m

    # 2. precedence; grants that stalled past the timeout lapse
    for vid, granted_at in sorted(w.granted.items()):
        gv = w.vehicles[vid]
        if not gv.in_play or (gv.phase is Phase.AT_LINE and t - granted_at > p.deadlock.timeout_ticks):
            del w.granted[vid]
            w.reported_cycles = {c for c in w.reported_cycles if vid not in c}
    # only the head of each approach queue contends from outside the box
    heads: dict[str, VehicleState] = {}
    for v in ordered:
        if v.phase in (Phase.APPROACHING, Phase.AT_LINE):
            cur = heads.get(v.approach)
            d = 0.0 if v.phase is Phase.AT_LINE else v.distance_m
            if cur is None or d < (0.0 if cur.phase is Phase.AT_LINE else cur.distance_m):
                heads[v.approach] = v
    contenders = [
        c
        for c in (_contender(v, p.decision_zone_m) for v in ordered)
        if c is not None and (c.phase is ContenderPhase.CROSSING or heads[c.approach] is w.vehicles[c.vehicle_id])
    ]
    full = build_precedence(contenders, x, norms)
    g = full.without_edges_from(w.granted)
    w.last_graph = g
    positions = {
        c.vehicle_id: (w.vehicles[c.vehicle_id].distance_m if c.phase is ContenderPhase.APPROACHING else 0.0)
        for c in contenders
    }

    # 3. decisions
    ped_pairs: set[tuple[str, str]] = set()
    for v in ordered:
        if v.phase is Phase.AT_LINE and v.maneuver is not Maneuver.STRAIGHT:
            out = x.at_bearing(exit_bearing(v.bearing, v.maneuver))
            for q in s.pedestrians:
                if q.active(t) and q.approach == out.id:
                    ped_pairs.add((v.vehicle_id, q.id))
    ped_holds = {vid for vid, _ in ped_pairs}

    actions: dict[str, Action] = {}
    for v in ordered:
        if v.phase is Phase.AT_LINE:
            view = _view(w, v, full, g, ped_holds, positions, fines)
            a = decide(v.strategy, view, p.utility)
            actions[v.vehicle_id] = a
            events.append(TickEvent.make(t, "decision", v.vehicle_id, vehicle=v.vehicle_id, action=a.value))
            if a is Action.HOLD:
                w.held_since.setdefault(v.vehicle_id, t)
            else:
                w.held_since.pop(v.vehicle_id, None)
    w.last_actions = actions

    # 4. violations
    crossing = [c for c in contenders if c.phase is ContenderPhase.CROSSING]
    violations = detect_violations(g, {k: a.value for k, a in actions.items()}, crossing, ped_pairs, t, x)
    for viol in violations:
        events.append(
            TickEvent.make(
                t, "violation", viol.violator, violator=viol.violator, norm=viol.norm_id, beneficiary=viol.beneficiary
            )
        )

    # 5. movement
    line_taken = {v.approach for v in ordered if v.phase is Phase.AT_LINE}
    for v in ordered:
        if v.phase is Phase.CROSSING:
            if v.path_index + 1 >= len(v.cells):
                v.phase, v.path_index, v.exit_tick = Phase.EXITED, None, t
                w.held_since.pop(v.vehicle_id, None)
                w.granted.pop(v.vehicle_id, None)
                events.append(TickEvent.make(t, "exited", v.vehicle_id, vehicle=v.vehicle_id))
            else:
                v.path_index += 1
        elif v.phase is Phase.AT_LINE and actions.get(v.vehicle_id) is Action.PROCEED:
            v.phase, v.path_index, v.distance_m = Phase.CROSSING, 0, None
            events.append(TickEvent.make(t, "entered", v.vehicle_id, vehicle=v.vehicle_id, cell=v.cells[0].value))

    queues: dict[str, list[VehicleState]] = defaultdict(list)
    for v in ordered:
        if v.phase is Phase.APPROACHING:
            queues[v.approach].append(v)
    for approach, queue in sorted(queues.items()):
        floor = p.queue_spacing_m if approach in line_taken else 0.0
        for v in sorted(queue, key=lambda q: (q.distance_m, q.spawn_tick, q.vehicle_id)):
            target = max(v.distance_m - p.step_m, min(floor, v.distance_m))
            if target <= EPS:
                v.phase, v.distance_m, v.arrival_tick = Phase.AT_LINE, None, t
                floor = p.queue_spacing_m
            else:
                v.distance_m = target
                floor = target + p.queue_spacing_m

    # 6. collisions
    crossing_now = {v.vehicle_id: v.footprint() for v in ordered if v.phase is Phase.CROSSING}
    for col in detect_collisions(crossing_now):
        events.append(
            TickEvent.make(t, "collision", col.vehicles[0], cell=col.cell.value, vehicles=list(col.vehicles))
        )
        for vid in col.vehicles:
            cv = w.vehicles[vid]
            cv.phase, cv.path_index = Phase.CRASHED, None
            w.granted.pop(vid, None)
            w.held_since.pop(vid, None)

    # 7. governance
    if p.governance:
        for viol in violations:
            testimonies = collect_testimonies(viol, positions, p.perception_radius_m)
            for ts in testimonies:
                events.append(
                    TickEvent.make(
                        t, "testimony", viol.violator, witness=ts.witness, violator=ts.violator, norm=ts.norm_id
                    )
                )
            sanction = adjudicate(viol, testimonies, p.testimony_threshold, fines)
            if sanction is not None:
                w.ledger.apply(sanction)
                events.append(
                    TickEvent.make(
                        t,
                        "sanction",
                        sanction.violator,
                        sanction_id=sanction.sanction_id,
                        violator=sanction.violator,
                        norm=sanction.norm_id,
                        fine=sanction.fine,
                        testimonies=sanction.testimony_count,
                    )
                )

    # 8. deadlock watchdog
    horizon = t - p.deadlock.timeout_ticks
    for cycle in detect_normative_deadlock(g):
        key = tuple(cycle)
        if key in w.reported_cycles:
            continue
        if not all(
            actions.get(m) is Action.HOLD and w.held_since.get(m, t + 1) <= horizon for m in cycle
        ):
            continue
        w.reported_cycles.add(key)
        events.append(TickEvent.make(t, "deadlock_detected", cycle[0], cycle=list(cycle)))
        if not p.governance:
            continue
        members = [CycleMember(m, w.vehicles[m].arrival_tick, w.vehicles[m].bearing) for m in cycle]
        chosen = arbitrate_deadlock(members, p.deadlock)
        if chosen is not None and chosen not in w.granted:
            w.granted[chosen] = t
            events.append(TickEvent.make(t, "grant", chosen, vehicle=chosen, cycle=list(cycle)))

    w.tick += 1
    return sorted(events, key=TickEvent.sort_key)


def step(w: WorldState) -> tuple[WorldState, list[TickEvent]]:
    """Functional form of :func:`advance`: the input world is left untouched."""
    nxt = copy.deepcopy(w)
    events = advance(nxt)
    return nxt, events


@dataclass(frozen=True)
class VehicleMetrics:
    id: str
    exit_tick: int | None
    delay_ticks: int | None
    violations: int
    fines: float
    reputation: int


@dataclass(frozen=True)
class Metrics:
    collisions: int = 0
    violations: int = 0
    sanctions: int = 0
    deadlocks: int = 0
    vehicles_exited: int = 0
    throughput: float = 0.0
    per_vehicle: tuple[VehicleMetrics, ...] = ()
    ticks: int = 0


def ideal_exit_tick(v: VehicleState, step_m: float) -> int:
    return v.spawn_tick + math.ceil(v.spawn_distance_m / step_m - EPS) + len(v.cells)


def compute_metrics(w: WorldState, events: Iterable[TickEvent]) -> Metrics:
    counts: dict[str, int] = defaultdict(int)
    per_violator: dict[str, int] = defaultdict(int)
    for e in events:
        counts[e.type] += 1
        if e.type == "violation":
            per_violator[e["violator"]] += 1
    per_vehicle = []
    exited = 0
    for vid in sorted(w.vehicles):
        v = w.vehicles[vid]
        delay = None
        if v.phase is Phase.EXITED:
            exited += 1
            delay = v.exit_tick - ideal_exit_tick(v, w.params.step_m)
        rec = w.ledger.agent(vid)
        per_vehicle.append(VehicleMetrics(vid, v.exit_tick, delay, per_violator[vid], rec.total_fines, rec.reputation))
    elapsed = w.tick * w.params.tick_seconds
    return Metrics(
        collisions=counts["collision"],
        violations=counts["violation"],
        sanctions=counts["sanction"],
        deadlocks=counts["deadlock_detected"],
        vehicles_exited=exited,
        throughput=exited / elapsed if elapsed > 0 else 0.0,
        per_vehicle=tuple(per_vehicle),
        ticks=w.tick,
    )


@dataclass
class RunResult:
    scenario: Scenario
    metrics: Metrics
    events: list[TickEvent]
    snapshots: list[list[dict]]
    world: WorldState

    def events_at(self, tick: int) -> list[TickEvent]:
        return [e for e in self.events if e.tick == tick]

    def of_type(self, type: str) -> list[TickEvent]:
        return [e for e in self.events if e.type == type]

    @property
    def exit_order(self) -> list[str]:
        return [e["vehicle"] for e in self.of_type("exited")]


def run(scenario: Scenario, on_tick=None) -> RunResult:
    """Simulate until every vehicle has exited or crashed, or ``ticks_max`` is reached.

    ``on_tick(world, events)`` is called after every tick, for instrumentation.
    """
    try:
        w = new_world(scenario)
    except NormSimError as e:
        raise NormSimError("E_INVALID_SCENARIO", str(e)) from e
    events: list[TickEvent] = []
    snapshots: list[list[dict]] = []
    while not w.finished:
        tick_events = advance(w)
        events.extend(tick_events)
        snapshots.append([w.vehicles[k].snapshot() for k in sorted(w.vehicles)])
        if on_tick is not None:
            on_tick(w, tick_events)
    return RunResult(scenario, compute_metrics(w, events), events, snapshots, w)
