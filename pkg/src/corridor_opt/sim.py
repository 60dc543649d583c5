"""Time-stepped corridor simulation.

Arrivals queue at the corridor entry and are released first-in-first-out once
the rear-end margin allows.  In optimal mode each vehicle gets zone crossing
times from the FIFO booking rule, solves its route once against its
predecessor's published motion, and replays the plan; a re-solve happens only
if the predecessor's plan changes.  In baseline mode vehicles follow an
intelligent-driver car-following law with per-zone desired speeds instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .metrics import RunReport, VehicleReport, total_fuel
from .model import (LeaderProfile, SafetyParams, VehicleParams, VehicleState,
                    Waypoint, leader_state_at)
from .routes import InfeasibleRouteError, RoutePlanProblem, Trajectory, solve_route
from .scenario import (ArrivalSpec, FifoSchedulerParams, ScenarioSpec,
                       schedule_from_zone_times)
from .model import ScheduleAssignment


@dataclass(frozen=True)
class SimConfig:
    scenario: ScenarioSpec
    mode: str = "optimal"          # "optimal" | "baseline"
    dt: float = 0.1                # s
    seed: int = 0
    horizon: float = 600.0         # s

    @classmethod
    def from_scenario(cls, spec: ScenarioSpec, mode: str | None = None,
                      seed: int | None = None, dt: float | None = None) -> "SimConfig":
        return cls(scenario=spec,
                   mode=spec.mode if mode is None else mode,
                   dt=spec.dt if dt is None else dt,
                   seed=spec.seed if seed is None else seed,
                   horizon=spec.horizon)


@dataclass
class VehicleRecord:
    id: int
    arrival_time: float
    v0: float
    params: VehicleParams
    safety: SafetyParams
    zone_times: tuple[float, ...] | None = None
    entry_time: float | None = None
    exit_time: float | None = None
    schedule: ScheduleAssignment | None = None
    trajectory: Trajectory | None = None
    plan_version: int = 0
    leader_id: int | None = None
    leader_version: int = -1
    position: float = 0.0
    speed: float = 0.0
    accel: float = 0.0
    next_zone: int = 0
    retired: bool = False


@dataclass
class SimState:
    clock: float
    pending: list[VehicleRecord]
    queue: list[VehicleRecord] = field(default_factory=list)
    done: list[VehicleRecord] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    bookings: dict[int, float] = field(default_factory=dict)
    samples: list[tuple] = field(default_factory=list)   # (t, id, p, v, u, margin)

    def log(self, t: float, event: str, vehicle: int, **extra):
        self.events.append({"t": round(t, 9), "event": event, "vehicle": vehicle,
                            **extra})


def build_arrivals(spec: ScenarioSpec, seed: int) -> list[VehicleRecord]:
    """Explicit vehicles plus generated ones, ids in arrival order."""
    records = [VehicleRecord(id=v.id, arrival_time=v.arrival_time, v0=v.v0,
                             params=v.params, safety=v.safety, zone_times=v.zone_times)
               for v in spec.vehicles]
    arr = spec.arrivals
    if arr is not None:
        next_id = max((r.id for r in records), default=0) + 1
        base_params = spec.vehicles[0].params if spec.vehicles else VehicleParams()
        base_safety = spec.vehicles[0].safety if spec.vehicles else SafetyParams()
        if arr.kind == "list":
            for t, v0 in arr.entries:
                records.append(VehicleRecord(next_id, t, v0, base_params, base_safety))
                next_id += 1
        else:
            rng = np.random.default_rng(seed)
            t = 0.0
            for _ in range(arr.count):
                t += max(arr.min_gap, float(rng.exponential(1.0 / arr.rate)))
                records.append(VehicleRecord(next_id, t, arr.v0, base_params,
                                             base_safety))
                next_id += 1
    records.sort(key=lambda r: (r.arrival_time, r.id))
    return records


def make_initial_state(config: SimConfig) -> SimState:
    return SimState(clock=0.0, pending=build_arrivals(config.scenario, config.seed))


def assign_schedule(state: SimState, vehicle_id: int,
                    params: FifoSchedulerParams, spec: ScenarioSpec,
                    entry_time: float | None = None) -> ScheduleAssignment:
    """FIFO booking: each zone crossing waits for the previous booking + headway."""
    rec = next(r for r in state.queue + state.pending if r.id == vehicle_id)
    t0 = rec.entry_time if entry_time is None else entry_time
    if t0 is None:
        t0 = rec.arrival_time
    zones = spec.corridor.zones
    times = []
    t_prev, p_prev = t0, 0.0
    cruise = max(rec.v0, 0.1)
    for z in zones:
        seg = z.position - p_prev
        # segment pace: blend toward the zone's pinned speed when there is one
        v_seg = cruise if z.desired_speed is None else 0.5 * (cruise + z.desired_speed)
        v_seg = min(rec.params.v_max, max(v_seg, 0.1))
        earliest = t_prev + seg / v_seg
        booked = state.bookings.get(z.id)
        t_z = max(earliest, t_prev + seg / rec.params.v_max)
        if booked is not None:
            t_z = max(t_z, booked + params.zone_headway)
        times.append(t_z)
        state.bookings[z.id] = t_z
        t_prev, p_prev = t_z, z.position
        if z.desired_speed is not None:
            cruise = z.desired_speed
    entry = next((v for v in spec.vehicles if v.id == vehicle_id), None)
    v0 = rec.v0 if entry is None else entry.v0
    waypoints = tuple(Waypoint(t, z.position, z.desired_speed)
                      for t, z in zip(times[:-1], zones[:-1]))
    return ScheduleAssignment(entry_time=t0, entry_speed=v0, waypoints=waypoints,
                              terminal_time=times[-1],
                              terminal_position=zones[-1].position)


def trajectory_to_profile(traj: Trajectory, drift_tol: float = 1e-4) -> LeaderProfile:
    """Publish a plan as piecewise-constant-acceleration leader motion.

    Step sizes adapt to each arc's control slope so the cumulative position
    drift of the published profile stays within drift_tol; speeds are exact at
    the knots.
    """
    from .arcs import PolynomialArc
    knot_blocks = []
    for seg in traj.segments:
        span = seg.t_end - seg.t_start
        if isinstance(seg, PolynomialArc):
            jerk = abs(seg.alpha)
            dt = math.sqrt(12.0 * drift_tol / max(span * jerk, 1e-12))
        else:
            dt = 0.05
        dt = min(2.0, max(0.02, dt))
        n = max(1, int(math.ceil(span / dt)))
        knot_blocks.append(np.linspace(seg.t_start, seg.t_end, n + 1)[:-1])
    knots = np.concatenate(knot_blocks + [np.array([traj.t_end])])
    speeds = np.array([traj.speed(t) for t in knots])
    spans = [(knots[i + 1] - knots[i],
              (speeds[i + 1] - speeds[i]) / (knots[i + 1] - knots[i]))
             for i in range(len(knots) - 1)]
    return LeaderProfile.from_accel_spans(traj.t_start, traj.position(traj.t_start),
                                          speeds[0], spans, exit_time=traj.t_end)


# The follower can come to rest a few percent inside its target standstill gap;
# aiming above gamma keeps physical stopping gaps at or above gamma.
IDM_STANDSTILL_BUFFER = 0.5


@dataclass(frozen=True)
class IdmParams:
    """Intelligent-driver baseline with the corridor's desired speed plugged in."""

    desired_speed: float
    accel: float = 1.5
    decel: float = 2.0
    time_headway: float = 1.2
    min_gap: float = 3.0
    exponent: float = 4.0
    u_min: float = -6.0
    u_max: float = 3.0


def baseline_accel(state: VehicleState, leader: VehicleState | None,
                   params: IdmParams) -> float:
    v = max(state.speed, 0.0)
    v0 = max(params.desired_speed, 0.1)
    free = 1.0 - (v / v0) ** params.exponent
    interaction = 0.0
    if leader is not None:
        gap = max(leader.position - state.position, 1e-3)
        closing = v - leader.speed
        s_star = (params.min_gap + params.time_headway * v
                  + v * closing / (2.0 * math.sqrt(params.accel * params.decel)))
        s_star = max(s_star, params.min_gap)
        interaction = (s_star / gap) ** 2
    a = params.accel * (free - interaction)
    return float(np.clip(a, params.u_min, params.u_max))


def _desired_speed_at(spec: ScenarioSpec, position: float) -> float:
    for z in spec.corridor.zones:
        if position < z.position and z.desired_speed is not None:
            return z.desired_speed
    return spec.free_speed


def _entry_margin_ok(rec: VehicleRecord, leader: VehicleRecord | None,
                     params: FifoSchedulerParams) -> bool:
    if leader is None:
        return True
    margin = (rec.safety.xi * (leader.position - 0.0)
              - (rec.safety.gamma + rec.safety.rho * rec.v0))
    return margin >= params.entry_margin


def _plan(rec: VehicleRecord, leader: VehicleRecord | None, spec: ScenarioSpec,
          state: SimState):
    """Solve or re-solve the vehicle's route against its predecessor's plan."""
    safety_ctx = None
    if leader is not None and leader.trajectory is not None:
        profile = trajectory_to_profile(leader.trajectory)
        safety_ctx = (profile, rec.safety)
        rec.leader_id, rec.leader_version = leader.id, leader.plan_version
    elif leader is None and spec.leader is not None:
        safety_ctx = (spec.leader, rec.safety)
        rec.leader_id, rec.leader_version = -1, 0
    else:
        rec.leader_id, rec.leader_version = None, -1
    problem = RoutePlanProblem(rec.schedule, rec.params, safety_ctx)
    try:
        rec.trajectory = solve_route(problem)
    except InfeasibleRouteError as err:
        raise InfeasibleRouteError(
            f"vehicle {rec.id} at t={state.clock:.2f}: {err}",
            time=err.time, vehicle_id=rec.id) from None
    rec.plan_version += 1
    state.log(state.clock, "plan", rec.id, version=rec.plan_version,
              cost=rec.trajectory.cost)


def step(state: SimState, config: SimConfig) -> SimState:
    """Advance the clock one step, releasing arrivals and moving every vehicle."""
    spec = config.scenario
    t_now = state.clock
    t_next = t_now + config.dt

    # release pending arrivals FIFO while the entry is safe
    while state.pending and state.pending[0].arrival_time <= t_now + 1e-9:
        rec = state.pending[0]
        leader = state.queue[-1] if state.queue else None
        if not _entry_margin_ok(rec, leader, spec.scheduler):
            break
        state.pending.pop(0)
        rec.entry_time = t_now
        rec.position, rec.speed = 0.0, rec.v0
        state.queue.append(rec)
        if rec.zone_times is not None:
            entry = next(v for v in spec.vehicles if v.id == rec.id)
            rec.schedule = schedule_from_zone_times(spec, entry, rec.zone_times)
        else:
            rec.schedule = assign_schedule(state, rec.id, spec.scheduler, spec,
                                           entry_time=t_now)
        state.log(t_now, "entry", rec.id, v0=rec.v0)
        state.log(t_now, "schedule", rec.id,
                  zone_times=[round(t, 6) for t in
                              (*(w.time for w in rec.schedule.waypoints),
                               rec.schedule.terminal_time)])
        if config.mode == "optimal":
            _plan(rec, leader, spec, state)

    # replan followers whose predecessor changed plans (optimal mode)
    if config.mode == "optimal":
        for i, rec in enumerate(state.queue):
            leader = state.queue[i - 1] if i > 0 else None
            if leader is not None and rec.trajectory is not None:
                if rec.leader_id != leader.id or rec.leader_version != leader.plan_version:
                    _plan(rec, leader, spec, state)

    # move vehicles
    for i, rec in enumerate(list(state.queue)):
        if config.mode == "optimal":
            traj = rec.trajectory
            t_eval = min(t_next, traj.t_end)
            u, v, p = traj.eval(t_eval)
            rec.position, rec.speed, rec.accel = p, v, u
            if t_next >= traj.t_end - 1e-9:
                rec.exit_time = traj.t_end
        else:
            leader = state.queue[i - 1] if i > 0 else None
            leader_state = None
            if leader is not None and not leader.retired:
                leader_state = VehicleState(leader.position, leader.speed, t_now)
            elif leader is None and spec.leader is not None \
                    and t_now <= spec.leader.exit_time:
                leader_state = leader_state_at(spec.leader, t_now)
            idm = IdmParams(desired_speed=_desired_speed_at(spec, rec.position),
                            time_headway=rec.safety.rho,
                            min_gap=rec.safety.gamma + IDM_STANDSTILL_BUFFER,
                            u_min=rec.params.u_min, u_max=rec.params.u_max)
            a = baseline_accel(VehicleState(rec.position, rec.speed, t_now),
                               leader_state, idm)
            v_new = rec.speed + a * config.dt
            if v_new < 0.0:
                a = -rec.speed / config.dt
                v_new = 0.0
            rec.position += rec.speed * config.dt + 0.5 * a * config.dt**2
            rec.speed, rec.accel = v_new, a
            if rec.position >= spec.corridor.length - 1e-9 and rec.exit_time is None:
                rec.exit_time = t_next

        # zone crossing events
        zones = spec.corridor.zones
        while rec.next_zone < len(zones) and rec.position >= zones[rec.next_zone].position - 1e-9:
            state.log(t_next, "zone_crossing", rec.id, zone=zones[rec.next_zone].id)
            rec.next_zone += 1

    # retire vehicles past their route end
    still = []
    for rec in state.queue:
        if rec.exit_time is not None and t_next >= rec.exit_time - 1e-9:
            rec.retired = True
            state.done.append(rec)
            state.log(t_next, "exit", rec.id, exit_time=round(rec.exit_time, 9))
        else:
            still.append(rec)
    state.queue = still

    # sample every active vehicle
    for i, rec in enumerate(state.queue):
        margin = math.inf
        if i > 0:
            lead = state.queue[i - 1]
            margin = (rec.safety.xi * (lead.position - rec.position)
                      - (rec.safety.gamma + rec.safety.rho * rec.speed))
        elif spec.leader is not None and t_next <= spec.leader.exit_time:
            lead_state = leader_state_at(spec.leader, t_next)
            margin = (rec.safety.xi * (lead_state.position - rec.position)
                      - (rec.safety.gamma + rec.safety.rho * rec.speed))
        state.samples.append((t_next, rec.id, rec.position, rec.speed, rec.accel,
                              margin))

    state.clock = t_next
    return state


def run_sim(config: SimConfig) -> SimState:
    state = make_initial_state(config)
    guard = int(config.horizon / config.dt) + 1
    for _ in range(guard):
        if state.clock >= config.horizon:
            break
        if not state.pending and not state.queue:
            break
        step(state, config)
    return state


def build_report(state: SimState, config: SimConfig) -> RunReport:
    """Fold a finished run into per-vehicle travel/fuel plus violation events."""
    spec = config.scenario
    report = RunReport(scenario_id=spec.name, mode=config.mode)
    fuel_stride = max(1, round(1.0 / config.dt))
    by_vehicle: dict[int, list[tuple]] = {}
    for row in state.samples:
        by_vehicle.setdefault(row[1], []).append(row)
    for rec in sorted(state.done, key=lambda r: r.id):
        rows = by_vehicle.get(rec.id, [])
        speeds = [r[3] for r in rows][::fuel_stride]
        accels = [r[4] for r in rows][::fuel_stride]
        fuel = 0.0
        if len(speeds) >= 2:
            fuel = total_fuel(speeds, accels, spec.fuel, dt=1.0)
        report.vehicles.append(VehicleReport(
            vehicle_id=rec.id,
            arrival_time=rec.arrival_time,
            entry_time=rec.entry_time if rec.entry_time is not None else math.nan,
            exit_time=rec.exit_time if rec.exit_time is not None else math.nan,
            travel_time=(rec.exit_time - rec.entry_time
                         if rec.exit_time is not None and rec.entry_time is not None
                         else math.nan),
            fuel=fuel,
        ))
    tol = spec.margin_violation_tol
    for t, vid, _, _, _, margin in state.samples:
        if margin < -tol:
            report.violations.append((vid, t, margin))
    return report
