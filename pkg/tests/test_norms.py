import random

import pytest
from hypothesis import given, settings, strategies as st

from normsim.errors import NormSimError
from normsim.norms import (
    ART38,
    NORM1,
    NORM2,
    NORM3,
    OCCUPANCY,
    Contender,
    ContenderPhase,
    PrecedenceEdge,
    PrecedenceGraph,
    Violation,
    build_precedence,
    default_btc_norms,
    detect_normative_deadlock,
    detect_violations,
    norm_between,
)
from normsim.road import IntersectionKind, RoadClass, conflicts, four_way, is_opposite, is_perpendicular

from gen import random_contenders, random_intersection
from oracles import brute_force_cycles

X4 = four_way()
PINK = Contender("PINK", "W", "straight", arrival_tick=3)
YELLOW = Contender("YELLOW", "S", "straight", arrival_tick=3)
RED = Contender("RED", "E", "left", arrival_tick=3)


def test_default_norms():
    norms = {n.id: n for n in default_btc_norms()}
    assert set(norms) == {NORM1, NORM2, NORM3, ART38}
    assert "vehicles moving on main roads have the preference" in norms[NORM1].description
    assert norms[NORM3].rank == 3
    assert "vehicles coming from the right have the preference" in norms[NORM3].description
    assert norms[ART38].article == 38
    assert "yield to pedestrians, cyclists and vehicles that come from the opposite direction" in norms[ART38].description
    assert norms[NORM1].rank < norms[NORM2].rank < norms[NORM3].rank
    assert all(n.article == 29 for n in norms.values() if n.id != ART38)
    assert all(n.fine == 100 for n in norms.values())


def test_negative_fine_rejected():
    with pytest.raises(NormSimError):
        default_btc_norms(fine=-1)


def test_contender_arrival_invariant():
    with pytest.raises(NormSimError):
        Contender("a", "W", "straight", ContenderPhase.APPROACHING, 3)
    with pytest.raises(NormSimError):
        Contender("a", "W", "straight", ContenderPhase.AT_LINE, None)


def test_norm_between_norm3():
    assert norm_between(PINK, YELLOW, X4) == PrecedenceEdge("PINK", "YELLOW", NORM3)
    assert norm_between(YELLOW, PINK, X4) == PrecedenceEdge("PINK", "YELLOW", NORM3)


def test_norm_between_norm1_overrides_right_rule():
    x = four_way(ns_class=RoadClass.SECONDARY, ew_class=RoadClass.MAIN)
    u = Contender("u", "S", "straight")
    w = Contender("w", "W", "straight")
    # by the right-hand rule w would yield to u; the main road wins
    assert norm_between(u, w, x) == PrecedenceEdge("u", "w", NORM1)


def test_norm_between_art38():
    assert norm_between(RED, PINK, X4) == PrecedenceEdge("RED", "PINK", ART38)


def test_norm_between_norm2_enterer_yields():
    circ = Contender("c", "W", "left", ContenderPhase.CROSSING, 1)
    enter = Contender("e", "S", "straight", ContenderPhase.AT_LINE, 2)
    # on a plain crossing the right-hand rule favours the S vehicle
    assert norm_between(enter, circ, X4) == PrecedenceEdge("c", "e", NORM3)
    x = four_way(kind=IntersectionKind.ROUNDABOUT)
    assert norm_between(enter, circ, x) == PrecedenceEdge("e", "c", NORM2)


def test_norm_between_unregulated_pair():
    u = Contender("u", "W", "left")
    w = Contender("w", "E", "left")
    assert norm_between(u, w, X4) is None


def test_norm_between_left_vs_right_turn_from_opposite():
    u = Contender("u", "W", "left")
    w = Contender("w", "E", "right")
    assert norm_between(u, w, X4) == PrecedenceEdge("u", "w", ART38)


def test_norm_between_respects_active_norm_subset():
    assert norm_between(PINK, YELLOW, X4, norms=[ART38]) is None


def test_norm_between_errors():
    with pytest.raises(NormSimError) as e:
        norm_between(PINK, Contender("q", "E", "straight"), X4)
    assert e.value.code == "E_NOT_CONFLICTING"
    with pytest.raises(NormSimError) as e:
        norm_between(PINK, Contender("q", "W", "left"), X4)
    assert e.value.code == "E_SAME_APPROACH"


def test_build_precedence_figure_scenario():
    g = build_precedence([PINK, YELLOW, RED], X4)
    assert g.edges == {
        PrecedenceEdge("PINK", "YELLOW", NORM3),
        PrecedenceEdge("YELLOW", "RED", NORM3),
        PrecedenceEdge("RED", "PINK", ART38),
    }


def test_build_precedence_trivial_cases():
    g = build_precedence([PINK], X4)
    assert g.nodes == {"PINK"} and not g.edges
    g = build_precedence([Contender("u", "W", "straight"), Contender("w", "E", "straight")], X4)
    assert g.nodes == {"u", "w"} and not g.edges


def test_build_precedence_dup_id():
    with pytest.raises(NormSimError) as e:
        build_precedence([PINK, PINK], X4)
    assert e.value.code == "E_DUP_ID"


def test_deadlock_figure_scenario():
    assert detect_normative_deadlock(build_precedence([PINK, YELLOW, RED], X4)) == [["PINK", "YELLOW", "RED"]]


def test_deadlock_empty():
    assert detect_normative_deadlock(PrecedenceGraph()) == []


def test_deadlock_four_straights():
    cs = [Contender(f"{a}1", a, "straight") for a in "NESW"]
    g = build_precedence(cs, X4)
    assert {(e.yielder, e.beneficiary) for e in g.edges} == {
        ("W1", "S1"),
        ("S1", "E1"),
        ("E1", "N1"),
        ("N1", "W1"),
    }
    assert all(e.norm_id == NORM3 for e in g.edges)
    assert detect_normative_deadlock(g) == [["E1", "N1", "W1", "S1"]]


@settings(max_examples=300)
@given(
    st.integers(1, 6).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n * (n - 1)),
        )
    )
)
def test_deadlock_matches_brute_force(data):
    n, pairs = data
    names = [f"n{i}" for i in range(n)]
    edges, seen = set(), set()
    for a, b in pairs:
        if a != b and (a, b) not in seen:
            seen.add((a, b))
            edges.add(PrecedenceEdge(names[a], names[b], NORM3))
    g = PrecedenceGraph({v: Contender(v, "W", "straight") for v in names}, frozenset(edges))
    expected = brute_force_cycles(names, [(e.yielder, e.beneficiary) for e in edges])
    assert detect_normative_deadlock(g) == expected


def test_violation_rebel_ignores_edge():
    g = build_precedence([PINK, YELLOW, RED], X4)
    actions = {"PINK": "hold", "YELLOW": "proceed", "RED": "hold"}
    assert detect_violations(g, actions, [], [], 4, X4) == [Violation(4, "YELLOW", NORM3, "RED")]


def test_violation_none_when_all_hold():
    g = build_precedence([PINK, YELLOW, RED], X4)
    assert detect_violations(g, dict.fromkeys(g.nodes, "hold"), [], [], 4, X4) == []


def test_violation_crosswalk():
    v = Contender("v", "W", "right")
    g = build_precedence([v], X4)
    assert detect_violations(g, {"v": "proceed"}, [], [("v", "P1")], 2, X4) == [Violation(2, "v", ART38, "P1")]


def test_violation_occupancy():
    # opposing left turns: no norm edge, but entering while the other is inside is still an offence
    inside = Contender("a", "W", "left", ContenderPhase.CROSSING, 1)
    me = Contender("b", "E", "left", ContenderPhase.AT_LINE, 2)
    g = build_precedence([inside, me], X4)
    assert not g.edges
    assert detect_violations(g, {"b": "proceed"}, [inside], [], 3, X4) == [Violation(3, "b", OCCUPANCY, "a")]


def test_violation_unknown_vehicle():
    g = build_precedence([PINK], X4)
    with pytest.raises(NormSimError) as e:
        detect_violations(g, {"GHOST": "proceed"}, [], [], 0, X4)
    assert e.value.code == "E_UNKNOWN_VEHICLE"


@settings(max_examples=500)
@given(st.integers(0, 2**32 - 1))
def test_precedence_structure(seed):
    rng = random.Random(seed)
    x = random_intersection(rng)
    cs = random_contenders(rng, x)
    g = build_precedence(cs, x)
    pairs = set()
    for e in g.edges:
        u, w = g.contenders[e.yielder], g.contenders[e.beneficiary]
        bu, bw = x.bearing(u.approach), x.bearing(w.approach)
        assert e.yielder != e.beneficiary
        assert conflicts(u.movement(x), w.movement(x))
        if e.norm_id == ART38:
            assert is_opposite(bu, bw)
        if e.norm_id in (NORM1, NORM3):
            assert is_perpendicular(bu, bw)
        if e.norm_id == NORM2:
            assert x.kind is IntersectionKind.ROUNDABOUT
        if x.approach(u.approach).road_class != x.approach(w.approach).road_class:
            assert e.norm_id == NORM1
        key = frozenset((e.yielder, e.beneficiary))
        assert key not in pairs
        pairs.add(key)
