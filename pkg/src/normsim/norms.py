"""Right-of-way norms, the must-yield graph they induce, deadlocks and violations."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .errors import NormSimError
from .road import (
    Intersection,
    IntersectionKind,
    Maneuver,
    Movement,
    conflicts,
    is_opposite,
    right_of,
)

NORM1 = "norm1"
NORM2 = "norm2"
NORM3 = "norm3"
ART38 = "art38"
OCCUPANCY = "occupancy"  # reserved id: entering while a conflicting vehicle is inside the box

NORM_IDS = (NORM1, NORM2, NORM3, ART38)
RANK = {NORM1: 1, NORM2: 2, NORM3: 3, ART38: 4, OCCUPANCY: 5}
DEFAULT_FINE = 100


@dataclass(frozen=True)
class Norm:
    id: str
    article: int
    rank: int
    description: str
    fine: float = DEFAULT_FINE

    def __post_init__(self):
        if self.fine < 0:
            raise NormSimError("E_BAD_FINE", f"{self.id}: fine must be >= 0")


def default_btc_norms(fine: float = DEFAULT_FINE) -> list[Norm]:
    """Brazilian Transit Code right-of-way rules (Art. 29 I-III and Art. 38 sole paragraph)."""
    return [
        Norm(NORM1, 29, 1, "Main road: vehicles moving on main roads have the preference.", fine),
        Norm(
            NORM2,
            29,
            2,
            "Traffic circle: the one that is circulating through it has the preference.",
            fine,
        ),
        Norm(NORM3, 29, 3, "Other cases: vehicles coming from the right have the preference.", fine),
        Norm(
            ART38,
            38,
            4,
            "Turning: yield to pedestrians, cyclists and vehicles that come from the opposite "
            "direction on the road being left, respecting the preferences of article 29.",
            fine,
        ),
    ]


def fine_schedule(norms: Iterable[Norm]) -> dict[str, float]:
    """Norm id -> fine, including the occupancy rule priced like norm3."""
    fines = {n.id: n.fine for n in norms}
    fines[OCCUPANCY] = fines.get(NORM3, DEFAULT_FINE)
    return fines


class ContenderPhase(str, Enum):
    APPROACHING = "approaching_in_zone"
    AT_LINE = "at_line"
    CROSSING = "crossing"


@dataclass(frozen=True)
class Contender:
    vehicle_id: str
    approach: str
    maneuver: Maneuver
    phase: ContenderPhase = ContenderPhase.AT_LINE
    arrival_tick: int | None = 0

    def __post_init__(self):
        object.__setattr__(self, "maneuver", Maneuver(self.maneuver))
        object.__setattr__(self, "phase", ContenderPhase(self.phase))
        if self.phase is ContenderPhase.APPROACHING:
            if self.arrival_tick is not None:
                raise NormSimError("E_BAD_CONTENDER", f"{self.vehicle_id}: approaching vehicles have no arrival tick")
        elif self.arrival_tick is None:
            raise NormSimError("E_BAD_CONTENDER", f"{self.vehicle_id}: arrival tick required at the line")

    def movement(self, x: Intersection) -> Movement:
        return x.movement(self.approach, self.maneuver)

    @property
    def circulating(self) -> bool:
        return self.phase is ContenderPhase.CROSSING


@dataclass(frozen=True)
class PrecedenceEdge:
    yielder: str
    beneficiary: str
    norm_id: str


@dataclass(frozen=True)
class Violation:
    tick: int
    violator: str
    norm_id: str
    beneficiary: str | None = None


def _active_ids(norms) -> set[str]:
    if norms is None:
        return set(NORM_IDS)
    return {n if isinstance(n, str) else n.id for n in norms}


def norm_between(
    u: Contender, w: Contender, x: Intersection, norms: Iterable[Norm] | None = None
) -> PrecedenceEdge | None:
    """The must-yield edge between two conflicting contenders, or None if no norm covers them.

    Norms are tried in priority order (norm2, norm1, norm3, art38); the first that
    applies decides.  When both vehicles turn from opposite sides the left turner
    yields; two opposing left turns are left unregulated.
    """
    if u.approach == w.approach:
        raise NormSimError("E_SAME_APPROACH", f"{u.vehicle_id} and {w.vehicle_id} share an approach")
    mu, mw = u.movement(x), w.movement(x)
    if not conflicts(mu, mw):
        raise NormSimError("E_NOT_CONFLICTING", f"{u.vehicle_id} and {w.vehicle_id} do not conflict")
    active = _active_ids(norms)

    def edge(yielder: Contender, beneficiary: Contender, norm_id: str) -> PrecedenceEdge:
        return PrecedenceEdge(yielder.vehicle_id, beneficiary.vehicle_id, norm_id)

    if NORM2 in active and x.kind is IntersectionKind.ROUNDABOUT and u.circulating != w.circulating:
        return edge(w, u, NORM2) if u.circulating else edge(u, w, NORM2)

    if NORM1 in active:
        cu, cw = x.approach(u.approach).road_class, x.approach(w.approach).road_class
        if cu != cw:
            return edge(u, w, NORM1) if cu.value == "secondary" else edge(w, u, NORM1)

    if NORM3 in active:
        if right_of(u.approach, x) == w.approach:
            return edge(u, w, NORM3)
        if right_of(w.approach, x) == u.approach:
            return edge(w, u, NORM3)

    if ART38 in active and is_opposite(mu.bearing, mw.bearing):
        u_turns = u.maneuver is not Maneuver.STRAIGHT
        w_turns = w.maneuver is not Maneuver.STRAIGHT
        if u_turns and not w_turns:
            return edge(u, w, ART38)
        if w_turns and not u_turns:
            return edge(w, u, ART38)
        if u_turns and w_turns and u.maneuver != w.maneuver:
            return edge(u, w, ART38) if u.maneuver is Maneuver.LEFT else edge(w, u, ART38)
    return None


@dataclass(frozen=True)
class PrecedenceGraph:
    contenders: Mapping[str, Contender] = field(default_factory=dict)
    edges: frozenset[PrecedenceEdge] = frozenset()

    @property
    def nodes(self) -> frozenset[str]:
        return frozenset(self.contenders)

    def outgoing(self, vehicle_id: str) -> list[PrecedenceEdge]:
        return sorted(
            (e for e in self.edges if e.yielder == vehicle_id), key=lambda e: (RANK[e.norm_id], e.beneficiary)
        )

    def successors(self, vehicle_id: str) -> list[str]:
        return sorted(e.beneficiary for e in self.edges if e.yielder == vehicle_id)

    def edge_between(self, a: str, b: str) -> PrecedenceEdge | None:
        for e in self.edges:
            if {e.yielder, e.beneficiary} == {a, b}:
                return e
        return None

    def without_edges_from(self, yielders: Iterable[str]) -> PrecedenceGraph:
        drop = set(yielders)
        return PrecedenceGraph(self.contenders, frozenset(e for e in self.edges if e.yielder not in drop))


def build_precedence(
    contenders: Iterable[Contender], x: Intersection, norms: Iterable[Norm] | None = None
) -> PrecedenceGraph:
    by_id: dict[str, Contender] = {}
    for c in contenders:
        if c.vehicle_id in by_id:
            raise NormSimError("E_DUP_ID", f"contender {c.vehicle_id!r} listed twice")
        by_id[c.vehicle_id] = c
    norms = list(norms) if norms is not None else None

    ids = sorted(by_id)
    edges = set()
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            u, w = by_id[a], by_id[b]
            if u.approach == w.approach or not conflicts(u.movement(x), w.movement(x)):
                continue
            e = norm_between(u, w, x, norms)
            if e is not None:
                edges.add(e)
    return PrecedenceGraph(by_id, frozenset(edges))


def detect_normative_deadlock(g: PrecedenceGraph) -> list[list[str]]:
    """Every elementary directed cycle, rotated to start at its smallest id, sorted.

    Each cycle is found exactly once by only extending paths through nodes
    larger than the start node.  Graphs here hold a handful of vehicles, so
    plain backtracking is enough.
    """
    succ = {v: g.successors(v) for v in sorted(g.nodes)}
    cycles: list[list[str]] = []

    def extend(start: str, path: list[str], on_path: set[str]) -> None:
        for nxt in succ[path[-1]]:
            if nxt == start:
                cycles.append(list(path))
            elif nxt > start and nxt not in on_path:
                path.append(nxt)
                on_path.add(nxt)
                extend(start, path, on_path)
                on_path.discard(nxt)
                path.pop()

    for start in succ:
        extend(start, [start], {start})
    return sorted(cycles)


def detect_violations(
    g: PrecedenceGraph,
    actions: Mapping[str, str],
    occupancy: Iterable[Contender],
    ped_holds: Iterable[tuple[str, str]],
    tick: int,
    x: Intersection,
) -> list[Violation]:
    """At most one violation per proceeding vehicle, most serious reason first.

    Reasons in order: ignoring an own must-yield edge; entering while a
    conflicting vehicle is inside the box; turning across an active crosswalk.
    """
    crossers = sorted(occupancy, key=lambda c: c.vehicle_id)
    holds: dict[str, list[str]] = {}
    for vehicle_id, ped_id in ped_holds:
        holds.setdefault(vehicle_id, []).append(ped_id)

    out = []
    for vid in sorted(actions):
        if vid not in g.contenders:
            raise NormSimError("E_UNKNOWN_VEHICLE", f"no contender {vid!r}")
        if actions[vid] != "proceed":
            continue
        edges = g.outgoing(vid)
        if edges:
            out.append(Violation(tick, vid, edges[0].norm_id, edges[0].beneficiary))
            continue
        me = g.contenders[vid]
        blocking = [
            c
            for c in crossers
            if c.vehicle_id != vid and c.approach != me.approach and conflicts(me.movement(x), c.movement(x))
        ]
        if blocking:
            out.append(Violation(tick, vid, OCCUPANCY, blocking[0].vehicle_id))
        elif vid in holds:
            out.append(Violation(tick, vid, ART38, sorted(holds[vid])[0]))
    return out
