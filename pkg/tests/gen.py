"""Random inputs shared by the property tests and the acceptance suite."""

from __future__ import annotations

import random

from normsim.norms import Contender, ContenderPhase
from normsim.road import IntersectionKind, Maneuver, RoadClass, four_way
from normsim.scenario import PedestrianSpec, Scenario, VehicleSpec
from normsim.strategies import Strategy


def random_intersection(rng: random.Random):
    kind = rng.choice(list(IntersectionKind))
    if kind is IntersectionKind.ROUNDABOUT:
        return four_way(kind=kind)
    return four_way(rng.choice(list(RoadClass)), rng.choice(list(RoadClass)))


def random_contenders(rng: random.Random, x) -> list[Contender]:
    approaches = rng.sample([a.id for a in x.approaches], rng.randint(1, len(x.approaches)))
    out = []
    for i, a in enumerate(approaches):
        phase = rng.choice(list(ContenderPhase))
        arrival = None if phase is ContenderPhase.APPROACHING else rng.randrange(10)
        out.append(Contender(f"v{i}", a, rng.choice(list(Maneuver)), phase, arrival))
    return out


def random_scenario(
    rng: random.Random,
    strategies=(Strategy.SOCIAL, Strategy.PRESSURED),
    max_vehicles: int = 7,
    pedestrians: bool = True,
    name: str = "random",
) -> Scenario:
    x = random_intersection(rng)
    vehicles = tuple(
        VehicleSpec(
            f"V{j}",
            rng.choice("NESW"),
            rng.choice(list(Maneuver)),
            rng.randrange(0, 8),
            rng.choice([5.0, 12.5, 20.0, 25.0, 40.0]),
            rng.choice(list(strategies)),
        )
        for j in range(rng.randint(1, max_vehicles))
    )
    peds = ()
    if pedestrians and rng.random() < 0.3:
        peds = (PedestrianSpec("P1", rng.choice("NESW"), rng.randrange(0, 10), rng.randint(1, 6)),)
    return Scenario(name, x, vehicles, seed=rng.getrandbits(32), ticks_max=300, pedestrians=peds)
