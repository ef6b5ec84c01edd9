"""Run the two three-vehicle fixtures and print what happened in each.

    python3 scripts/reproduce_case_study.py
"""

from __future__ import annotations

from pathlib import Path

from normsim.scenario import load_scenario
from normsim.sim import run

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def describe(name: str) -> None:
    result = run(load_scenario(SCENARIOS / f"{name}.json"))
    m = result.metrics
    print(f"== {name}: {result.scenario.description}")
    print(
        f"   collisions={m.collisions} violations={m.violations} sanctions={m.sanctions} "
        f"deadlocks={m.deadlocks} exited={m.vehicles_exited} ticks={m.ticks}"
    )
    for e in result.of_type("deadlock_detected"):
        print(f"   tick {e.tick}: deadlock among {', '.join(e['cycle'])}")
    for e in result.of_type("violation"):
        print(f"   tick {e.tick}: {e['violator']} broke {e['norm']} against {e['beneficiary']}")
    for e in result.of_type("sanction"):
        print(f"   tick {e.tick}: {e['violator']} fined {e['fine']} on {e['testimonies']} testimonies")
    if result.exit_order:
        print(f"   exit order: {' -> '.join(result.exit_order)}")


def main() -> None:
    for name in ("scenario_a", "scenario_b", "scenario_a_arbitrated"):
        describe(name)


if __name__ == "__main__":
    main()
