import itertools

import pytest
from hypothesis import given, strategies as st

from normsim.errors import NormSimError
from normsim.road import (
    BEARINGS,
    Approach,
    Cell,
    E,
    Intersection,
    IntersectionKind,
    Maneuver,
    Movement,
    N,
    RoadClass,
    S,
    W,
    conflicts,
    four_way,
    is_opposite,
    is_perpendicular,
    movement_cells,
    opposite_of,
    right_of,
    validate_intersection,
)

from oracles import walk_cells

X4 = four_way()
X3 = four_way(bearings=(W, S, E))
MOVES = [Movement(b, m) for b in BEARINGS for m in Maneuver]


def test_right_of_examples():
    assert right_of("W", X4) == "S"
    assert right_of("S", X4) == "E"
    assert right_of("E", X3) is None


def test_right_of_matches_heading_geometry():
    # the right-hand side of heading (hx, hy) is (hy, -hx); that side's bearing is where traffic comes from
    heading = {0: (0, -1), 90: (-1, 0), 180: (0, 1), 270: (1, 0)}
    side_to_bearing = {(0, 1): 0, (1, 0): 90, (0, -1): 180, (-1, 0): 270}
    names = {0: "N", 90: "E", 180: "S", 270: "W"}
    for b, (hx, hy) in heading.items():
        assert right_of(names[b], X4) == names[side_to_bearing[(hy, -hx)]]


def test_opposite_of_examples():
    assert opposite_of("W", X4) == "E"
    assert opposite_of("N", X4) == "S"
    assert opposite_of("S", X3) is None


def test_unknown_approach():
    with pytest.raises(NormSimError) as e:
        right_of("Q", X4)
    assert e.value.code == "E_UNKNOWN_APPROACH"
    with pytest.raises(NormSimError) as e:
        opposite_of("Q", X4)
    assert e.value.code == "E_UNKNOWN_APPROACH"


def test_right_of_four_times_is_identity_and_injective():
    for a in "NESW":
        b = a
        for _ in range(4):
            b = right_of(b, X4)
        assert b == a
    assert len({right_of(a, X4) for a in "NESW"}) == 4
    assert len({opposite_of(a, X4) for a in "NESW"}) == 4


@pytest.mark.parametrize(
    "bearing, maneuver, cells",
    [
        (W, "straight", ["SW", "SE"]),
        (W, "right", ["SW"]),
        (E, "left", ["NE", "NW", "SW"]),
    ],
)
def test_movement_cells_examples(bearing, maneuver, cells):
    assert [c.value for c in movement_cells(bearing, maneuver)] == cells


@pytest.mark.parametrize("mv", MOVES, ids=str)
def test_movement_cells_match_walker_and_lengths(mv):
    cells = [c.value for c in mv.cells]
    assert cells == walk_cells(mv.bearing, mv.maneuver.value)
    assert len(cells) == {Maneuver.RIGHT: 1, Maneuver.STRAIGHT: 2, Maneuver.LEFT: 3}[mv.maneuver]
    adjacent = {frozenset(p) for p in [("NW", "NE"), ("SW", "SE"), ("NW", "SW"), ("NE", "SE")]}
    assert all(frozenset(pair) in adjacent for pair in zip(cells, cells[1:]))


def test_missing_exit():
    with pytest.raises(NormSimError) as e:
        X3.movement("S", Maneuver.STRAIGHT)
    assert e.value.code == "E_NO_EXIT"
    assert X3.movement("S", Maneuver.LEFT).cells == (Cell.SE, Cell.NE, Cell.NW)


def test_conflict_examples():
    assert conflicts(Movement(W, Maneuver.STRAIGHT), Movement(S, Maneuver.STRAIGHT))
    assert not conflicts(Movement(W, Maneuver.STRAIGHT), Movement(E, Maneuver.STRAIGHT))
    assert conflicts(Movement(E, Maneuver.LEFT), Movement(W, Maneuver.STRAIGHT))


def test_same_approach_is_not_a_conflict_question():
    with pytest.raises(NormSimError) as e:
        conflicts(Movement(W, Maneuver.LEFT), Movement(W, Maneuver.RIGHT))
    assert e.value.code == "E_SAME_APPROACH"


@given(st.sampled_from(MOVES), st.sampled_from(MOVES))
def test_conflicts_symmetric(u, w):
    if u.bearing != w.bearing:
        assert conflicts(u, w) == conflicts(w, u)


def test_structural_conflict_facts():
    for u, w in itertools.permutations(MOVES, 2):
        if u.bearing == w.bearing:
            continue
        both_straight = u.maneuver is w.maneuver is Maneuver.STRAIGHT
        if both_straight and is_opposite(u.bearing, w.bearing):
            assert not conflicts(u, w)
        if both_straight and is_perpendicular(u.bearing, w.bearing):
            assert conflicts(u, w)
        if u.maneuver is Maneuver.LEFT and w.maneuver is Maneuver.STRAIGHT and is_opposite(u.bearing, w.bearing):
            assert conflicts(u, w)


def test_validate_ok():
    assert validate_intersection(X4) == []


def test_validate_dup_bearing():
    x = Intersection(IntersectionKind.CROSSING, (Approach("A", 90), Approach("B", 90)))
    assert [d.code for d in validate_intersection(x)] == ["E_DUP_BEARING"]


def test_validate_road_class_mismatch():
    x = Intersection(
        IntersectionKind.CROSSING, (Approach("W", W, RoadClass.MAIN), Approach("E", E, RoadClass.SECONDARY))
    )
    assert [d.code for d in validate_intersection(x)] == ["E_ROAD_CLASS_MISMATCH"]


def test_validate_reports_every_failure():
    x = Intersection(
        IntersectionKind.ROUNDABOUT,
        (Approach("A", 45), Approach("B", N, RoadClass.MAIN), Approach("B", S)),
    )
    codes = sorted(d.code for d in validate_intersection(x))
    assert codes == sorted(
        ["E_BAD_BEARING", "E_ROUNDABOUT_MAIN_ROAD", "E_DUP_APPROACH_ID", "E_ROAD_CLASS_MISMATCH"]
    )
    assert all(d.path.startswith("intersection.approaches[") for d in validate_intersection(x))


def test_validate_too_few():
    x = Intersection(IntersectionKind.CROSSING, (Approach("A", 0),))
    assert [d.code for d in validate_intersection(x)] == ["E_TOO_FEW_APPROACHES"]
