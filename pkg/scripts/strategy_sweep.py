"""Every social/pressured/rebellious assignment over the three-vehicle geometry.

    python3 scripts/strategy_sweep.py [--reflex] [--policy fcfs_arbitration]
"""

from __future__ import annotations

import argparse
import dataclasses
import itertools
from pathlib import Path

from normsim.governance import DeadlockPolicy
from normsim.scenario import load_scenario
from normsim.sim import run
from normsim.strategies import Strategy

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
SHORT = {Strategy.SOCIAL: "S", Strategy.PRESSURED: "P", Strategy.REBELLIOUS: "R"}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reflex", action="store_true", help="rebels hold when their entry cell is about to be occupied")
    ap.add_argument("--policy", default="none", choices=("none", "fcfs_arbitration"))
    args = ap.parse_args()

    base = load_scenario(SCENARIOS / "scenario_b.json")
    params = dataclasses.replace(
        base.params,
        utility=dataclasses.replace(base.params.utility, safety_reflex=args.reflex),
        deadlock=DeadlockPolicy(args.policy, base.params.deadlock.timeout_ticks),
    )
    ids = [v.id for v in base.vehicles]
    print(f"{'/'.join(ids):<18} coll viol sanc dead exit  order")
    for assignment in itertools.product(list(Strategy), repeat=len(ids)):
        vehicles = tuple(dataclasses.replace(v, strategy=s) for v, s in zip(base.vehicles, assignment))
        result = run(dataclasses.replace(base, vehicles=vehicles, params=params))
        m = result.metrics
        label = "/".join(SHORT[s] for s in assignment)
        print(
            f"{label:<18} {m.collisions:>4} {m.violations:>4} {m.sanctions:>4} {m.deadlocks:>4} "
            f"{m.vehicles_exited:>4}  {','.join(result.exit_order)}"
        )


if __name__ == "__main__":
    main()
