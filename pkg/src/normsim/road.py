"""Junction geometry: approaches, the four-quadrant cell model, and movement conflicts.

Bearings name the side a vehicle enters from (0 = N, 90 = E, 180 = S, 270 = W);
a vehicle entering from bearing ``b`` travels toward ``b + 180``.  Traffic keeps
right.  The junction box is split into four quadrants and every movement is a
short chain of edge-adjacent quadrants, which doubles as the conflict model and
the collision model.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .errors import Diagnostic, NormSimError

N, E, S, W = 0, 90, 180, 270
BEARINGS = (N, E, S, W)
COMPASS = {N: "N", E: "E", S: "S", W: "W"}


class RoadClass(str, Enum):
    MAIN = "main"
    SECONDARY = "secondary"


class IntersectionKind(str, Enum):
    CROSSING = "crossing"
    ROUNDABOUT = "roundabout"


class Maneuver(str, Enum):
    STRAIGHT = "straight"
    RIGHT = "right"
    LEFT = "left"


class Cell(str, Enum):
    NW = "NW"
    NE = "NE"
    SW = "SW"
    SE = "SE"


# Right-hand lane quadrant on each side of the box, inbound and outbound.
_ENTRY_CELL = {W: Cell.SW, S: Cell.SE, E: Cell.NE, N: Cell.NW}
_EXIT_CELL = {W: Cell.NW, S: Cell.SW, E: Cell.SE, N: Cell.NE}

_TURN = {Maneuver.STRAIGHT: 180, Maneuver.RIGHT: -90, Maneuver.LEFT: 90}


def exit_bearing(bearing: int, maneuver: Maneuver) -> int:
    """Side of the box a movement leaves through."""
    return (bearing + _TURN[Maneuver(maneuver)]) % 360


def movement_cells(bearing: int, maneuver: Maneuver) -> tuple[Cell, ...]:
    """Ordered quadrants swept by a movement entering from ``bearing``.

    Right turns stay in the entry quadrant, straights cross into the far
    quadrant of the same lane, and left turns continue one quadrant ahead
    before swinging into the outbound lane (1, 2 and 3 cells).
    """
    if bearing not in _ENTRY_CELL:
        raise NormSimError("E_BAD_BEARING", f"bearing {bearing} is not orthogonal")
    maneuver = Maneuver(maneuver)
    entry = _ENTRY_CELL[bearing]
    if maneuver is Maneuver.RIGHT:
        return (entry,)
    ahead = _EXIT_CELL[(bearing + 180) % 360]
    if maneuver is Maneuver.STRAIGHT:
        return (entry, ahead)
    return (entry, ahead, _EXIT_CELL[(bearing + 90) % 360])


class Movement(NamedTuple):
    bearing: int
    maneuver: Maneuver

    @property
    def cells(self) -> tuple[Cell, ...]:
        return movement_cells(self.bearing, self.maneuver)


def conflicts(u: Movement, w: Movement) -> bool:
    """True iff two movements from different approaches share any quadrant."""
    if u.bearing == w.bearing:
        raise NormSimError("E_SAME_APPROACH", "movements from one approach queue, they do not conflict")
    return not set(u.cells).isdisjoint(w.cells)


def is_opposite(b1: int, b2: int) -> bool:
    return (b1 - b2) % 360 == 180


def is_perpendicular(b1: int, b2: int) -> bool:
    return (b1 - b2) % 180 == 90


@dataclass(frozen=True)
class Approach:
    id: str
    bearing_deg: int
    road_class: RoadClass = RoadClass.SECONDARY


@dataclass(frozen=True)
class Intersection:
    kind: IntersectionKind
    approaches: tuple[Approach, ...]

    def approach(self, approach_id: str) -> Approach:
        for a in self.approaches:
            if a.id == approach_id:
                return a
        raise NormSimError("E_UNKNOWN_APPROACH", f"no approach {approach_id!r}")

    def at_bearing(self, bearing: int) -> Approach | None:
        for a in self.approaches:
            if a.bearing_deg == bearing % 360:
                return a
        return None

    def bearing(self, approach_id: str) -> int:
        return self.approach(approach_id).bearing_deg

    def movement(self, approach_id: str, maneuver: Maneuver) -> Movement:
        """Movement for an approach id, checking that the exit side exists."""
        b = self.bearing(approach_id)
        out = exit_bearing(b, maneuver)
        if self.at_bearing(out) is None:
            raise NormSimError(
                "E_NO_EXIT", f"{Maneuver(maneuver).value} from {approach_id!r} needs an exit at bearing {out}"
            )
        return Movement(b, Maneuver(maneuver))

    def movement_cells(self, approach_id: str, maneuver: Maneuver) -> tuple[Cell, ...]:
        return self.movement(approach_id, maneuver).cells


def four_way(
    ns_class: RoadClass = RoadClass.SECONDARY,
    ew_class: RoadClass = RoadClass.SECONDARY,
    kind: IntersectionKind = IntersectionKind.CROSSING,
    bearings: tuple[int, ...] = BEARINGS,
) -> Intersection:
    """Junction whose approach ids are the compass letters N/E/S/W."""
    approaches = tuple(
        Approach(COMPASS[b], b, RoadClass(ns_class if b in (N, S) else ew_class)) for b in bearings
    )
    return Intersection(IntersectionKind(kind), approaches)


def right_of(approach_id: str, x: Intersection) -> str | None:
    """Approach on the right-hand side of a vehicle entering from ``approach_id``."""
    a = x.approach(approach_id)
    other = x.at_bearing((a.bearing_deg - 90) % 360)
    return other.id if other else None


def opposite_of(approach_id: str, x: Intersection) -> str | None:
    a = x.approach(approach_id)
    other = x.at_bearing((a.bearing_deg + 180) % 360)
    return other.id if other else None


def validate_intersection(x: Intersection, path: str = "intersection") -> list[Diagnostic]:
    """All invariant failures of ``x``; an empty list means the junction is usable."""
    out: list[Diagnostic] = []
    n = len(x.approaches)
    if n < 2:
        out.append(Diagnostic("E_TOO_FEW_APPROACHES", f"{path}.approaches", f"need at least 2, got {n}"))
    if n > 4:
        out.append(Diagnostic("E_TOO_MANY_APPROACHES", f"{path}.approaches", f"at most 4, got {n}"))

    seen_ids: set[str] = set()
    seen_bearings: dict[int, int] = {}
    for i, a in enumerate(x.approaches):
        p = f"{path}.approaches[{i}]"
        if a.id in seen_ids:
            out.append(Diagnostic("E_DUP_APPROACH_ID", f"{p}.id", f"approach id {a.id!r} repeated"))
        seen_ids.add(a.id)
        if a.bearing_deg not in BEARINGS:
            out.append(Diagnostic("E_BAD_BEARING", f"{p}.bearing_deg", f"{a.bearing_deg} not in {BEARINGS}"))
        elif a.bearing_deg in seen_bearings:
            out.append(Diagnostic("E_DUP_BEARING", f"{p}.bearing_deg", f"bearing {a.bearing_deg} repeated"))
        else:
            seen_bearings[a.bearing_deg] = i
        if x.kind is IntersectionKind.ROUNDABOUT and a.road_class is RoadClass.MAIN:
            out.append(
                Diagnostic("E_ROUNDABOUT_MAIN_ROAD", f"{p}.road_class", "roundabout approaches must be secondary")
            )

    for b, i in seen_bearings.items():
        j = seen_bearings.get((b + 180) % 360)
        if j is not None and i < j and x.approaches[i].road_class != x.approaches[j].road_class:
            out.append(
                Diagnostic(
                    "E_ROAD_CLASS_MISMATCH",
                    f"{path}.approaches[{j}].road_class",
                    f"{x.approaches[i].id!r} and {x.approaches[j].id!r} are one road but differ in class",
                )
            )
    return out
