"""Scenario documents: typed model, JSON parsing with coded diagnostics, canonical dump."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import Diagnostic, NormSimError, ScenarioError
from .governance import DeadlockPolicy, PolicyKind
from .norms import DEFAULT_FINE, NORM_IDS, Norm, default_btc_norms
from .road import Approach, Intersection, IntersectionKind, Maneuver, RoadClass, validate_intersection
from .strategies import Strategy, UtilityParams


@dataclass(frozen=True)
class SimParams:
    tick_seconds: float = 0.5
    speed_mps: float = 10.0
    decision_zone_m: float = 30.0
    perception_radius_m: float = 50.0
    testimony_threshold: int = 1
    queue_spacing_m: float = 5.0
    utility: UtilityParams = UtilityParams()
    deadlock: DeadlockPolicy = DeadlockPolicy()
    governance: bool = True

    @property
    def step_m(self) -> float:
        return self.speed_mps * self.tick_seconds


@dataclass(frozen=True)
class VehicleSpec:
    id: str
    approach: str
    maneuver: Maneuver
    spawn_tick: int = 0
    spawn_distance_m: float = 20.0
    strategy: Strategy = Strategy.SOCIAL


@dataclass(frozen=True)
class PedestrianSpec:
    id: str
    approach: str
    start_tick: int = 0
    duration_ticks: int = 1

    def active(self, tick: int) -> bool:
        return self.start_tick <= tick < self.start_tick + self.duration_ticks


@dataclass(frozen=True)
class Scenario:
    name: str
    intersection: Intersection
    vehicles: tuple[VehicleSpec, ...] = ()
    seed: int = 0
    ticks_max: int = 200
    params: SimParams = SimParams()
    pedestrians: tuple[PedestrianSpec, ...] = ()
    fines: dict[str, float] = field(default_factory=lambda: {n: DEFAULT_FINE for n in NORM_IDS})
    description: str = ""

    def norms(self) -> list[Norm]:
        return [Norm(n.id, n.article, n.rank, n.description, self.fines.get(n.id, n.fine)) for n in default_btc_norms()]


# (key, type-check, default) for the flat "params" object
_PARAM_FIELDS = {
    "tick_seconds": ("positive", 0.5),
    "speed_mps": ("positive", 10.0),
    "decision_zone_m": ("nonneg", 30.0),
    "perception_radius_m": ("nonneg", 50.0),
    "testimony_threshold": ("count", 1),
    "queue_spacing_m": ("positive", 5.0),
    "time_value_per_s": ("nonneg", 1.0),
    "safety_reflex": ("bool", False),
    "deadlock_policy": ("policy", "none"),
    "deadlock_timeout_ticks": ("posint", 20),
    "governance": ("bool", True),
}

_TOP_FIELDS = {"name", "description", "seed", "ticks_max", "intersection", "params", "vehicles", "pedestrians", "norms"}


def _is_num(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


class _Checker:
    def __init__(self):
        self.diags: list[Diagnostic] = []

    def err(self, code: str, path: str, msg: str) -> None:
        self.diags.append(Diagnostic(code, path, msg))

    def obj(self, v: Any, path: str) -> dict | None:
        if not isinstance(v, dict):
            self.err("E_SCHEMA", path, "expected an object")
            return None
        return v

    def lst(self, v: Any, path: str) -> list:
        if not isinstance(v, list):
            self.err("E_SCHEMA", path, "expected a list")
            return []
        return v

    def string(self, d: dict, key: str, path: str, default: str | None = None) -> str | None:
        if key not in d:
            if default is None:
                self.err("E_SCHEMA", f"{path}.{key}", "required field missing")
            return default
        v = d[key]
        if not isinstance(v, str) or not v:
            self.err("E_SCHEMA", f"{path}.{key}", "expected a non-empty string")
            return default
        return v

    def integer(self, d: dict, key: str, path: str, default: int, lo: int = 0) -> int:
        v = d.get(key, default)
        if not _is_int(v):
            self.err("E_SCHEMA", f"{path}.{key}", "expected an integer")
            return default
        if v < lo:
            self.err("E_BAD_VALUE", f"{path}.{key}", f"must be >= {lo}")
        return v

    def unknown(self, d: dict, allowed, path: str) -> None:
        for k in sorted(set(d) - set(allowed)):
            self.err("E_UNKNOWN_FIELD", f"{path}.{k}", "unrecognized field")


def _parse_params(c: _Checker, raw: Any) -> SimParams:
    d = c.obj(raw, "params") if raw is not None else {}
    if d is None:
        return SimParams()
    c.unknown(d, _PARAM_FIELDS, "params")
    vals: dict[str, Any] = {}
    for key, (kind, default) in _PARAM_FIELDS.items():
        v = d.get(key, default)
        p = f"params.{key}"
        ok = True
        if kind in ("positive", "nonneg"):
            if not _is_num(v):
                c.err("E_SCHEMA", p, "expected a number")
                ok = False
            elif (v <= 0) if kind == "positive" else (v < 0):
                c.err("E_BAD_VALUE", p, "must be > 0" if kind == "positive" else "must be >= 0")
                ok = False
        elif kind in ("count", "posint"):
            lo = 0 if kind == "count" else 1
            if not _is_int(v):
                c.err("E_SCHEMA", p, "expected an integer")
                ok = False
            elif v < lo:
                c.err("E_BAD_VALUE", p, f"must be >= {lo}")
                ok = False
        elif kind == "bool":
            if not isinstance(v, bool):
                c.err("E_SCHEMA", p, "expected true or false")
                ok = False
        elif kind == "policy":
            if v not in {k.value for k in PolicyKind}:
                c.err("E_BAD_POLICY", p, f"unknown deadlock policy {v!r}")
                ok = False
        vals[key] = v if ok else default
    return SimParams(
        tick_seconds=float(vals["tick_seconds"]),
        speed_mps=float(vals["speed_mps"]),
        decision_zone_m=float(vals["decision_zone_m"]),
        perception_radius_m=float(vals["perception_radius_m"]),
        testimony_threshold=vals["testimony_threshold"],
        queue_spacing_m=float(vals["queue_spacing_m"]),
        utility=UtilityParams(float(vals["time_value_per_s"]), vals["safety_reflex"]),
        deadlock=DeadlockPolicy(PolicyKind(vals["deadlock_policy"]), vals["deadlock_timeout_ticks"]),
        governance=vals["governance"],
    )


def _parse_intersection(c: _Checker, raw: Any) -> Intersection | None:
    d = c.obj(raw, "intersection")
    if d is None:
        return None
    c.unknown(d, {"kind", "approaches"}, "intersection")
    kind = d.get("kind", "crossing")
    if kind not in {k.value for k in IntersectionKind}:
        c.err("E_BAD_KIND", "intersection.kind", f"unknown intersection kind {kind!r}")
        kind = "crossing"
    approaches = []
    for i, a in enumerate(c.lst(d.get("approaches"), "intersection.approaches")):
        p = f"intersection.approaches[{i}]"
        a = c.obj(a, p)
        if a is None:
            continue
        c.unknown(a, {"id", "bearing_deg", "road_class"}, p)
        aid = c.string(a, "id", p)
        bearing = a.get("bearing_deg")
        if not _is_int(bearing):
            c.err("E_SCHEMA", f"{p}.bearing_deg", "expected an integer bearing")
            continue
        rc = a.get("road_class", "secondary")
        if rc not in {r.value for r in RoadClass}:
            c.err("E_BAD_ROAD_CLASS", f"{p}.road_class", f"unknown road class {rc!r}")
            rc = "secondary"
        if aid is not None:
            approaches.append(Approach(aid, bearing, RoadClass(rc)))
    x = Intersection(IntersectionKind(kind), tuple(approaches))
    c.diags.extend(validate_intersection(x))
    return x


def _parse_vehicles(c: _Checker, raw: Any, x: Intersection | None) -> tuple[VehicleSpec, ...]:
    out = []
    seen: set[str] = set()
    for i, v in enumerate(c.lst(raw if raw is not None else [], "vehicles")):
        p = f"vehicles[{i}]"
        v = c.obj(v, p)
        if v is None:
            continue
        c.unknown(v, {"id", "approach", "maneuver", "spawn_tick", "spawn_distance_m", "strategy"}, p)
        vid = c.string(v, "id", p)
        if vid is not None:
            if vid in seen:
                c.err("E_DUP_ID", f"{p}.id", f"vehicle id {vid!r} repeated")
            seen.add(vid)
        approach = c.string(v, "approach", p)
        maneuver = v.get("maneuver", "straight")
        if maneuver not in {m.value for m in Maneuver}:
            c.err("E_BAD_MANEUVER", f"{p}.maneuver", f"unknown maneuver {maneuver!r}")
            maneuver = None
        strategy = v.get("strategy", "social")
        if strategy not in {s.value for s in Strategy}:
            c.err("E_BAD_STRATEGY", f"{p}.strategy", f"unknown strategy {strategy!r}")
            strategy = "social"
        spawn_tick = c.integer(v, "spawn_tick", p, 0)
        dist = v.get("spawn_distance_m", 20.0)
        if not _is_num(dist):
            c.err("E_SCHEMA", f"{p}.spawn_distance_m", "expected a number")
            dist = 20.0
        elif dist <= 0:
            c.err("E_BAD_VALUE", f"{p}.spawn_distance_m", "must be > 0")
        if x is not None and approach is not None:
            try:
                x.approach(approach)
                if maneuver is not None:
                    x.movement(approach, Maneuver(maneuver))
            except NormSimError as e:
                c.err(e.code, f"{p}.approach" if e.code == "E_UNKNOWN_APPROACH" else f"{p}.maneuver", e.message)
        if vid is not None and approach is not None and maneuver is not None:
            out.append(VehicleSpec(vid, approach, Maneuver(maneuver), spawn_tick, float(dist), Strategy(strategy)))
    return tuple(out)


def _parse_pedestrians(c: _Checker, raw: Any, x: Intersection | None) -> tuple[PedestrianSpec, ...]:
    out = []
    seen: set[str] = set()
    for i, d in enumerate(c.lst(raw if raw is not None else [], "pedestrians")):
        p = f"pedestrians[{i}]"
        d = c.obj(d, p)
        if d is None:
            continue
        c.unknown(d, {"id", "approach", "start_tick", "duration_ticks"}, p)
        pid = c.string(d, "id", p)
        if pid is not None:
            if pid in seen:
                c.err("E_DUP_ID", f"{p}.id", f"pedestrian id {pid!r} repeated")
            seen.add(pid)
        approach = c.string(d, "approach", p)
        if x is not None and approach is not None and approach not in {a.id for a in x.approaches}:
            c.err("E_UNKNOWN_APPROACH", f"{p}.approach", f"no approach {approach!r}")
        start = c.integer(d, "start_tick", p, 0)
        duration = c.integer(d, "duration_ticks", p, 1, lo=1)
        if pid is not None and approach is not None:
            out.append(PedestrianSpec(pid, approach, start, duration))
    return tuple(out)


def _parse_fines(c: _Checker, raw: Any) -> dict[str, float]:
    fines = {n: DEFAULT_FINE for n in NORM_IDS}
    if raw is None:
        return fines
    d = c.obj(raw, "norms")
    for k, v in (d or {}).items():
        if k not in NORM_IDS:
            c.err("E_UNKNOWN_NORM", f"norms.{k}", f"unknown norm id {k!r}")
        elif not _is_num(v):
            c.err("E_SCHEMA", f"norms.{k}", "expected a fine amount")
        elif v < 0:
            c.err("E_BAD_FINE", f"norms.{k}", "fine must be >= 0")
        else:
            fines[k] = v
    return fines


def scenario_from_dict(doc: Any) -> Scenario:
    c = _Checker()
    d = c.obj(doc, "")
    if d is None:
        raise ScenarioError(c.diags)
    c.unknown(d, _TOP_FIELDS, "")
    name = c.string(d, "name", "", default="scenario")
    description = d.get("description", "")
    if not isinstance(description, str):
        c.err("E_SCHEMA", "description", "expected a string")
        description = ""
    seed = c.integer(d, "seed", "", 0)
    if seed >= 2**64:
        c.err("E_BAD_VALUE", "seed", "must fit in 64 unsigned bits")
    ticks_max = c.integer(d, "ticks_max", "", 200, lo=1)
    if "intersection" not in d:
        c.err("E_SCHEMA", "intersection", "required field missing")
        x = None
    else:
        x = _parse_intersection(c, d["intersection"])
    params = _parse_params(c, d.get("params"))
    vehicles = _parse_vehicles(c, d.get("vehicles"), x)
    pedestrians = _parse_pedestrians(c, d.get("pedestrians"), x)
    fines = _parse_fines(c, d.get("norms"))
    if c.diags:
        raise ScenarioError(c.diags)
    return Scenario(name, x, vehicles, seed, ticks_max, params, pedestrians, fines, description)


def parse_scenario(text: str | bytes) -> Scenario:
    """Parse and validate a scenario document; raises ScenarioError listing every problem."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ScenarioError([Diagnostic("E_PARSE", "", str(e))]) from None
    return scenario_from_dict(doc)


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_bytes())


def scenario_to_dict(s: Scenario) -> dict:
    p = s.params
    doc = {
        "name": s.name,
        "description": s.description,
        "seed": s.seed,
        "ticks_max": s.ticks_max,
        "intersection": {
            "kind": s.intersection.kind.value,
            "approaches": [
                {"id": a.id, "bearing_deg": a.bearing_deg, "road_class": a.road_class.value}
                for a in s.intersection.approaches
            ],
        },
        "params": {
            "tick_seconds": p.tick_seconds,
            "speed_mps": p.speed_mps,
            "decision_zone_m": p.decision_zone_m,
            "perception_radius_m": p.perception_radius_m,
            "testimony_threshold": p.testimony_threshold,
            "queue_spacing_m": p.queue_spacing_m,
            "time_value_per_s": p.utility.time_value_per_s,
            "safety_reflex": p.utility.safety_reflex,
            "deadlock_policy": p.deadlock.kind.value,
            "deadlock_timeout_ticks": p.deadlock.timeout_ticks,
            "governance": p.governance,
        },
        "vehicles": [
            {
                "id": v.id,
                "approach": v.approach,
                "maneuver": v.maneuver.value,
                "spawn_tick": v.spawn_tick,
                "spawn_distance_m": v.spawn_distance_m,
                "strategy": v.strategy.value,
            }
            for v in s.vehicles
        ],
        "pedestrians": [
            {"id": q.id, "approach": q.approach, "start_tick": q.start_tick, "duration_ticks": q.duration_ticks}
            for q in s.pedestrians
        ],
        "norms": {k: s.fines[k] for k in NORM_IDS},
    }
    return doc


def dump_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"
