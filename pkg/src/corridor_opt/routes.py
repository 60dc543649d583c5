"""Piecing arcs through interior waypoints, and the per-vehicle route dispatcher.

A schedule with K interior waypoints yields K+1 unconstrained arcs tied
together by one 4(K+1) x 4(K+1) linear system.  At a waypoint the position is
pinned on both sides; speed and control stay continuous unless the waypoint
pins the speed, in which case the control is allowed to jump there.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arcs import PolynomialArc, SolverError, _row, arc_cost
from .model import (LeaderProfile, SafetyParams, ScheduleAssignment,
                    VehicleParams, Waypoint)


class InfeasibleRouteError(RuntimeError):
    """The schedule cannot be met; `time` points at the first violating instant."""

    def __init__(self, message: str, time: float | None = None,
                 vehicle_id: int | None = None):
        super().__init__(message)
        self.time = time
        self.vehicle_id = vehicle_id


@dataclass(frozen=True)
class RoutePlanProblem:
    """One vehicle's schedule plus, when following someone, the safety context."""

    schedule: ScheduleAssignment
    vehicle: VehicleParams = VehicleParams()
    safety: tuple[LeaderProfile, SafetyParams] | None = None


@dataclass(frozen=True)
class Trajectory:
    """Planned motion: contiguous arcs and constrained segments with a total cost."""

    segments: tuple
    cost: float = 0.0

    @classmethod
    def from_segments(cls, segments) -> "Trajectory":
        segments = tuple(segments)
        cost = 0.0
        for seg in segments:
            cost += arc_cost(seg) if isinstance(seg, PolynomialArc) else seg.cost()
        return cls(segments, cost)

    @property
    def t_start(self) -> float:
        return self.segments[0].t_start

    @property
    def t_end(self) -> float:
        return self.segments[-1].t_end

    def segment_at(self, t: float):
        if t < self.t_start - 1e-9 or t > self.t_end + 1e-9:
            raise ValueError(f"time {t:g} outside trajectory span "
                             f"[{self.t_start:g}, {self.t_end:g}]")
        for seg in self.segments:
            if t < seg.t_end:
                return seg
        return self.segments[-1]

    def eval(self, t: float) -> tuple[float, float, float]:
        """(u, v, p) at time t; junction instants resolve to the later segment."""
        seg = self.segment_at(t)
        return seg.control(t), seg.speed(t), seg.position(t)

    def control(self, t: float) -> float:
        return self.segment_at(t).control(t)

    def speed(self, t: float) -> float:
        return self.segment_at(t).speed(t)

    def position(self, t: float) -> float:
        return self.segment_at(t).position(t)

    def junction_times(self) -> tuple[float, ...]:
        return tuple(seg.t_start for seg in self.segments[1:])


# A chain row is a linear functional over all arc coefficients:
# ([(arc_index, kind, time, weight), ...], rhs), with kind in {"p", "v", "u"}.
def solve_arc_chain(knots: list[float], rows: list) -> list[PolynomialArc]:
    n = len(knots) - 1
    if n < 1:
        raise ValueError("need at least one arc interval")
    for a, b in zip(knots, knots[1:]):
        if not b > a:
            raise SolverError(f"degenerate arc interval [{a:g}, {b:g}]")
    if len(rows) != 4 * n:
        raise ValueError(f"need {4 * n} rows for {n} arcs, got {len(rows)}")
    mat = np.zeros((4 * n, 4 * n))
    rhs = np.zeros(4 * n)
    for i, (terms, value) in enumerate(rows):
        for arc_idx, kind, t, weight in terms:
            mat[i, 4 * arc_idx:4 * arc_idx + 4] += weight * _row(kind, t)
        rhs[i] = value
    try:
        coefs = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as err:
        raise SolverError(f"singular arc-chain system: {err}") from None
    residual = np.abs(mat @ coefs - rhs).max()
    if not np.isfinite(coefs).all() or residual > 1e-7:
        raise SolverError(f"ill-conditioned arc-chain system (residual {residual:.2e})")
    return [PolynomialArc(knots[j], knots[j + 1], *coefs[4 * j:4 * j + 4])
            for j in range(n)]


def waypoint_rows(waypoints: tuple[Waypoint, ...]) -> list:
    """Interior rows: position pinned on both sides; v (and u, unless speed is pinned) continuous."""
    rows = []
    for i, wp in enumerate(waypoints):
        rows.append(([(i, "p", wp.time, 1.0)], wp.position))
        rows.append(([(i + 1, "p", wp.time, 1.0)], wp.position))
        if wp.speed is None:
            rows.append(([(i, "v", wp.time, 1.0), (i + 1, "v", wp.time, -1.0)], 0.0))
            rows.append(([(i, "u", wp.time, 1.0), (i + 1, "u", wp.time, -1.0)], 0.0))
        else:
            rows.append(([(i, "v", wp.time, 1.0)], wp.speed))
            rows.append(([(i + 1, "v", wp.time, 1.0)], wp.speed))
    return rows


def solve_chain_through(entry: tuple[float, float, float],
                        waypoints: tuple[Waypoint, ...],
                        end_rows: list,
                        end_time: float) -> list[PolynomialArc]:
    """Arcs from an entry state through waypoints to two caller-supplied end rows.

    `end_rows` are written against the *last* arc (arc index len(waypoints)).
    """
    t0, p0, v0 = entry
    knots = [t0, *(w.time for w in waypoints), end_time]
    rows = [([(0, "p", t0, 1.0)], p0), ([(0, "v", t0, 1.0)], v0)]
    rows += waypoint_rows(waypoints)
    rows += end_rows
    return solve_arc_chain(knots, rows)


def _check_schedule(schedule: ScheduleAssignment):
    bad = schedule.violations()
    if bad:
        times = schedule.knot_times()
        first_bad = next((b for a, b in zip(times, times[1:]) if b <= a), times[0])
        raise InfeasibleRouteError("; ".join(bad), time=first_bad)


def solve_interior_bvp(problem: RoutePlanProblem) -> Trajectory:
    """Chain unconstrained arcs through the schedule's interior waypoints.

    The terminal closes with the pinned position and vanishing control (free
    terminal speed); waypoints follow the continuity pattern above.
    """
    sched = problem.schedule
    _check_schedule(sched)
    last = len(sched.waypoints)
    end_rows = [([(last, "p", sched.terminal_time, 1.0)], sched.terminal_position),
                ([(last, "u", sched.terminal_time, 1.0)], 0.0)]
    arcs = solve_chain_through((sched.entry_time, sched.entry_position, sched.entry_speed),
                               sched.waypoints, end_rows, sched.terminal_time)
    return Trajectory.from_segments(arcs)


def solve_route(problem: RoutePlanProblem) -> Trajectory:
    """Dispatch: unconstrained solution unless the rear-end margin activates."""
    base = solve_interior_bvp(problem)
    if problem.safety is None:
        return base
    from .safety import piece_constrained_route, violation_intervals
    leader, params = problem.safety
    if not violation_intervals(base, leader, params):
        return base
    return piece_constrained_route(problem, base)


def bound_violations(traj: Trajectory, params: VehicleParams,
                     sample_dt: float = 0.05) -> list[tuple[float, str, float]]:
    """Diagnostic scan for envelope violations: (time, quantity, value) triples.

    Violations are reported, not resolved; a schedule that forces them needs a
    different schedule.
    """
    out = []
    for seg in traj.segments:
        if isinstance(seg, PolynomialArc):
            ts = [seg.t_start, seg.t_end]
            if abs(seg.alpha) > 0:
                t_vertex = -seg.c / seg.alpha   # stationary point of v
                if seg.t_start < t_vertex < seg.t_end:
                    ts.append(t_vertex)
        else:
            ts = list(np.arange(seg.t_start, seg.t_end, sample_dt)) + [seg.t_end]
        for t in ts:
            u, v = seg.control(t), seg.speed(t)
            if u < params.u_min - 1e-9 or u > params.u_max + 1e-9:
                out.append((t, "control", u))
            if v < params.v_min - 1e-9 or v > params.v_max + 1e-9:
                out.append((t, "speed", v))
    return sorted(out)
