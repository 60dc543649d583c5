"""Scenario files: schema, loading, validation.

Scenario files are YAML with units spelled out in the field names (v0_mps,
position_m, ...) so the shipped cases stay reviewable in diffs.  The loader
maps them onto the domain types; `validate_scenario` returns violations
instead of raising so that callers can report all of them at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .metrics import FuelCoefficients
from .model import (ConflictZone, CorridorSpec, LeaderProfile, SafetyParams,
                    ScheduleAssignment, VehicleParams, Waypoint)


class ScenarioError(ValueError):
    """A scenario file cannot be parsed into a usable spec."""


@dataclass(frozen=True)
class FifoSchedulerParams:
    """First-in-first-out zone booking used in place of upstream scheduling."""

    zone_headway: float = 2.0    # s between successive crossings of one zone
    entry_margin: float = 0.5    # m of spare margin required to release an arrival


@dataclass(frozen=True)
class ArrivalSpec:
    kind: str = "list"                                   # "list" | "poisson"
    entries: tuple[tuple[float, float], ...] = ()        # (arrival_time, v0)
    rate: float = 0.2                                    # veh/s, poisson only
    count: int = 0
    v0: float = 12.0
    min_gap: float = 2.0                                 # s, floor on interarrivals


@dataclass(frozen=True)
class VehicleEntry:
    id: int
    arrival_time: float
    v0: float
    params: VehicleParams = VehicleParams()
    safety: SafetyParams = SafetyParams()
    zone_times: tuple[float, ...] | None = None   # explicit schedule, one per zone


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    corridor: CorridorSpec
    vehicles: tuple[VehicleEntry, ...] = ()
    leader: LeaderProfile | None = None           # external leader for the head vehicle
    arrivals: ArrivalSpec | None = None
    scheduler: FifoSchedulerParams = FifoSchedulerParams()
    mode: str = "optimal"
    dt: float = 0.1
    horizon: float = 600.0
    seed: int = 0
    free_speed: float = 15.0                      # m/s baseline desired speed off-zone
    fuel: FuelCoefficients = FuelCoefficients()
    margin_violation_tol: float = 1e-3            # m; margin below -tol is an event


def interior_zones(corridor: CorridorSpec) -> tuple[ConflictZone, ...]:
    return corridor.zones[:-1]


def schedule_from_zone_times(spec: ScenarioSpec, entry: VehicleEntry,
                             zone_times: tuple[float, ...],
                             entry_time: float | None = None) -> ScheduleAssignment:
    """Attach zone times to the corridor's zones; the last zone is the terminal."""
    zones = spec.corridor.zones
    if len(zone_times) != len(zones):
        raise ScenarioError(f"vehicle {entry.id}: {len(zone_times)} zone times for "
                            f"{len(zones)} zones")
    waypoints = tuple(Waypoint(t, z.position, z.desired_speed)
                      for t, z in zip(zone_times[:-1], zones[:-1]))
    return ScheduleAssignment(
        entry_time=entry.arrival_time if entry_time is None else entry_time,
        entry_speed=entry.v0,
        waypoints=waypoints,
        terminal_time=zone_times[-1],
        terminal_position=zones[-1].position,
    )


def validate_scenario(spec: ScenarioSpec) -> list[str]:
    """Empty list iff every domain invariant holds."""
    out: list[str] = []
    cor = spec.corridor
    if not cor.length > 0:
        out.append("corridor length must be positive")
    positions = [z.position for z in cor.zones]
    if any(b <= a for a, b in zip(positions, positions[1:])):
        out.append("non-increasing zone positions")
    for z in cor.zones:
        if not 0 < z.position <= cor.length:
            out.append(f"zone {z.id} position {z.position:g} outside (0, length]")
        if z.desired_speed is not None and z.desired_speed <= 0:
            out.append(f"zone {z.id} has nonpositive desired speed")
    if cor.zones and abs(positions[-1] - cor.length) > 1e-9:
        out.append("final zone must sit at the corridor end")
    if not cor.zones:
        out.append("corridor needs at least one conflict zone")

    seen_ids = set()
    for veh in spec.vehicles:
        tag = f"vehicle {veh.id}"
        if veh.id in seen_ids:
            out.append(f"{tag}: duplicate id")
        seen_ids.add(veh.id)
        if veh.v0 < 0:
            out.append(f"{tag}: negative entry speed")
        p = veh.params
        if not p.u_min < 0 < p.u_max:
            out.append(f"{tag}: control bounds must satisfy u_min < 0 < u_max")
        if not 0 <= p.v_min < p.v_max:
            out.append(f"{tag}: speed bounds must satisfy 0 <= v_min < v_max")
        s = veh.safety
        if s.xi <= 0:
            out.append(f"{tag}: nonpositive reaction constant")
        if s.gamma < 0:
            out.append(f"{tag}: negative standstill distance")
        if s.rho <= 0:
            out.append(f"{tag}: nonpositive time gap")
        if veh.zone_times is not None:
            if len(veh.zone_times) != len(cor.zones):
                out.append(f"{tag}: schedule must name a time for each of the "
                           f"{len(cor.zones)} zones")
            else:
                try:
                    sched = schedule_from_zone_times(spec, veh, veh.zone_times)
                    out.extend(f"{tag}: {v}" for v in sched.violations())
                except ScenarioError as err:
                    out.append(str(err))

    if spec.leader is not None:
        out.extend(f"leader: {v}" for v in spec.leader.violations())
    if spec.arrivals is not None:
        arr = spec.arrivals
        if arr.kind not in ("list", "poisson"):
            out.append(f"arrivals: unknown kind {arr.kind!r}")
        if arr.kind == "poisson" and arr.rate <= 0:
            out.append("arrivals: rate must be positive")
        if arr.min_gap < 0:
            out.append("arrivals: negative minimum gap")
    if spec.dt <= 0:
        out.append("sim dt must be positive")
    if spec.horizon <= 0:
        out.append("sim horizon must be positive")
    if spec.scheduler.zone_headway <= 0:
        out.append("scheduler zone headway must be positive")
    if spec.mode not in ("optimal", "baseline"):
        out.append(f"unknown mode {spec.mode!r}")
    return out


# --- YAML loading ------------------------------------------------------------

def _need(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ScenarioError(f"{context}: missing field {key!r}")
    return mapping[key]


def _number(value, context: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{context}: expected a number, got {value!r}")
    return float(value)


def _vehicle_params(data: dict | None, context: str,
                    base: VehicleParams = VehicleParams()) -> VehicleParams:
    if data is None:
        return base
    return VehicleParams(
        u_min=_number(data.get("u_min_mps2", base.u_min), context),
        u_max=_number(data.get("u_max_mps2", base.u_max), context),
        v_min=_number(data.get("v_min_mps", base.v_min), context),
        v_max=_number(data.get("v_max_mps", base.v_max), context),
    )


def _safety_params(data: dict | None, context: str,
                   base: SafetyParams = SafetyParams()) -> SafetyParams:
    if data is None:
        return base
    return SafetyParams(
        gamma=_number(data.get("gamma_m", base.gamma), context),
        rho=_number(data.get("rho_s", base.rho), context),
        xi=_number(data.get("xi", base.xi), context),
    )


def load_scenario(path: str | Path) -> ScenarioSpec:
    """Parse and validate a scenario file; raises ScenarioError on any defect."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as err:
        raise ScenarioError(f"cannot read scenario file: {err}") from None
    except yaml.YAMLError as err:
        raise ScenarioError(f"YAML syntax error in {path.name}: {err}") from None
    if not isinstance(raw, dict):
        raise ScenarioError(f"{path.name}: top level must be a mapping")

    cor_raw = _need(raw, "corridor", path.name)
    zones = []
    for i, z in enumerate(cor_raw.get("zones", [])):
        ctx = f"corridor.zones[{i}]"
        speed = z.get("desired_speed_mps")
        zones.append(ConflictZone(
            id=int(z.get("id", i + 1)),
            position=_number(_need(z, "position_m", ctx), ctx),
            desired_speed=None if speed is None else _number(speed, ctx),
        ))
    corridor = CorridorSpec(length=_number(_need(cor_raw, "length_m", "corridor"),
                                           "corridor"),
                            zones=tuple(zones))

    defaults = raw.get("defaults", {}) or {}
    base_params = _vehicle_params(defaults.get("vehicle"), "defaults.vehicle")
    base_safety = _safety_params(defaults.get("safety"), "defaults.safety")

    vehicles = []
    for i, v in enumerate(raw.get("vehicles", []) or []):
        ctx = f"vehicles[{i}]"
        zone_times = v.get("zone_times_s")
        vehicles.append(VehicleEntry(
            id=int(v.get("id", i + 1)),
            arrival_time=_number(v.get("arrival_time_s", 0.0), ctx),
            v0=_number(_need(v, "v0_mps", ctx), ctx),
            params=_vehicle_params(v.get("vehicle"), ctx, base_params),
            safety=_safety_params(v.get("safety"), ctx, base_safety),
            zone_times=None if zone_times is None
            else tuple(_number(t, ctx) for t in zone_times),
        ))

    leader = None
    if "leader" in raw and raw["leader"] is not None:
        ld = raw["leader"]
        spans = [(_number(_need(s, "duration_s", "leader.spans"), "leader.spans"),
                  _number(_need(s, "accel_mps2", "leader.spans"), "leader.spans"))
                 for s in _need(ld, "spans", "leader")]
        leader = LeaderProfile.from_accel_spans(
            start_time=_number(ld.get("start_time_s", 0.0), "leader"),
            position=_number(_need(ld, "start_position_m", "leader"), "leader"),
            speed=_number(_need(ld, "start_speed_mps", "leader"), "leader"),
            spans=spans,
            exit_time=(None if ld.get("exit_time_s") is None
                       else _number(ld["exit_time_s"], "leader")),
        )

    arrivals = None
    if "arrivals" in raw and raw["arrivals"] is not None:
        ar = raw["arrivals"]
        kind = ar.get("kind", "list")
        entries = tuple((_number(e.get("time_s", 0.0), "arrivals"),
                         _number(_need(e, "v0_mps", "arrivals"), "arrivals"))
                        for e in ar.get("entries", []) or [])
        arrivals = ArrivalSpec(
            kind=kind,
            entries=entries,
            rate=_number(ar.get("rate_veh_per_s", 0.2), "arrivals"),
            count=int(ar.get("count", 0)),
            v0=_number(ar.get("v0_mps", 12.0), "arrivals"),
            min_gap=_number(ar.get("min_gap_s", 2.0), "arrivals"),
        )

    sched_raw = raw.get("scheduler", {}) or {}
    scheduler = FifoSchedulerParams(
        zone_headway=_number(sched_raw.get("zone_headway_s", 2.0), "scheduler"),
        entry_margin=_number(sched_raw.get("entry_margin_m", 0.5), "scheduler"),
    )

    sim_raw = raw.get("sim", {}) or {}
    fuel_raw = raw.get("fuel", {}) or {}
    q = list(fuel_raw.get("q", [0.0, 0.0, 0.0, 0.0]))
    r = list(fuel_raw.get("r", [0.0, 0.0, 0.0]))
    if len(q) != 4 or len(r) != 3:
        raise ScenarioError("fuel: q needs 4 coefficients and r needs 3")
    fuel = FuelCoefficients(*(float(x) for x in q), *(float(x) for x in r))

    tol_raw = raw.get("tolerances", {}) or {}
    spec = ScenarioSpec(
        name=str(raw.get("name", path.stem)),
        corridor=corridor,
        vehicles=tuple(vehicles),
        leader=leader,
        arrivals=arrivals,
        scheduler=scheduler,
        mode=str(sim_raw.get("mode", "optimal")),
        dt=_number(sim_raw.get("dt_s", 0.1), "sim"),
        horizon=_number(sim_raw.get("horizon_s", 600.0), "sim"),
        seed=int(sim_raw.get("seed", 0)),
        free_speed=_number(sim_raw.get("free_speed_mps", 15.0), "sim"),
        fuel=fuel,
        margin_violation_tol=_number(tol_raw.get("margin_violation_m", 1e-3),
                                     "tolerances"),
    )
    problems = validate_scenario(spec)
    if problems:
        raise ScenarioError(f"{path.name}: " + "; ".join(problems))
    return spec
