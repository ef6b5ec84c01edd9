"""Normative multi-agent simulation of autonomous vehicles at unsignalized intersections."""

from .errors import Diagnostic, NormSimError, ScenarioError
from .scenario import Scenario, load_scenario, parse_scenario
from .sim import Metrics, RunResult, run

__all__ = [
    "Diagnostic",
    "Metrics",
    "NormSimError",
    "RunResult",
    "Scenario",
    "ScenarioError",
    "load_scenario",
    "parse_scenario",
    "run",
]
