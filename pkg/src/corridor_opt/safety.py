"""Rear-end safety: margin evaluation, constrained following arcs, junction search.

The margin against the vehicle ahead is

    margin(t) = xi * (p_leader(t) - p(t)) - (gamma + rho * v(t))

and must stay nonnegative.  When a planned trajectory would dip below zero,
the dip is replaced by a constrained segment on which the margin is held at
exactly zero; differentiating that identity forces the control

    u(t) = (xi / rho) * (v_leader(t) - v(t))

on the segment.  The free times where the constrained segment starts (t1) and
ends (t2) are found numerically: t2 from control continuity at the exit, t1
from stationarity of the total cost, both by nested 1-D root finding.  Entry
at t1 is tangential (margin and its derivative vanish) by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .arcs import PolynomialArc, SolverError, arc_cost
from .model import (LeaderProfile, SafetyParams, VehicleState, Waypoint,
                    leader_eval, leader_state_at)
from .routes import (InfeasibleRouteError, RoutePlanProblem, Trajectory,
                     solve_chain_through)

_T_MIN = 1e-3          # shortest admissible arc or window, s
_VIOLATION_TOL = -1e-6  # margin below this counts as a violation, m


@dataclass
class GapMargin:
    """Sampled margin s(t) - delta(t) on a uniform grid."""

    times: np.ndarray
    values: np.ndarray

    def min(self) -> float:
        return float(self.values.min())


def constrained_control(leader: LeaderProfile, state: VehicleState,
                        params: SafetyParams) -> float:
    """Unique control holding the margin constant while the constraint is active."""
    if params.rho <= 0:
        raise ValueError("rho must be positive for constrained following")
    v_k = leader_state_at(leader, state.time).speed
    return (params.xi / params.rho) * (v_k - state.speed)


@dataclass(frozen=True)
class ConstrainedSegment:
    """Following segment on which the margin identity holds exactly.

    Speed follows v' = (xi/rho) * (v_k - v), closed form per constant-accel
    leader span; position comes straight from the margin identity, so the
    margin is zero by construction everywhere on the segment.
    """

    t_start: float
    t_end: float
    params: SafetyParams
    knot_times: tuple[float, ...]     # sub-knots at leader breakpoints
    knot_speeds: tuple[float, ...]    # follower speed at each sub-knot
    leader_pos: tuple[float, ...]     # leader anchor state per sub-segment
    leader_speed: tuple[float, ...]
    leader_accel: tuple[float, ...]

    @classmethod
    def build(cls, t_start: float, t_end: float, v_start: float,
              leader: LeaderProfile, params: SafetyParams) -> "ConstrainedSegment":
        if not t_end > t_start:
            raise SolverError(f"degenerate constrained window [{t_start:g}, {t_end:g}]")
        if t_end > leader.exit_time + 1e-9:
            raise InfeasibleRouteError(
                "constrained window extends past leader exit", time=leader.exit_time)
        k = params.xi / params.rho
        lo = np.searchsorted(np.asarray(leader.starts), t_start, side="right")
        hi = np.searchsorted(np.asarray(leader.starts), t_end, side="left")
        knots = [t_start, *leader.starts[lo:hi], t_end]
        knot_arr = np.asarray(knots[:-1])
        lp_arr, lv_arr = leader_eval(leader, knot_arr)
        la_arr = np.array([leader.segments[leader.segment_index(t + 1e-12)].accel
                           for t in knots[:-1]])
        speeds = [v_start]
        v_i = v_start
        for i, (ta, tb) in enumerate(zip(knots, knots[1:])):
            accel = la_arr[i]
            w0 = lv_arr[i] - v_i
            tau = tb - ta
            w = accel / k + (w0 - accel / k) * math.exp(-k * tau)
            v_i = (lv_arr[i] + accel * tau) - w
            speeds.append(v_i)
        return cls(t_start, t_end, params, tuple(knots), tuple(speeds),
                   tuple(lp_arr), tuple(lv_arr), tuple(la_arr))

    def _sub_index(self, t):
        idx = np.searchsorted(np.asarray(self.knot_times), t, side="right") - 1
        return np.clip(idx, 0, len(self.knot_times) - 2)

    def _w(self, t):
        """Leader-minus-follower speed gap at time t."""
        idx = self._sub_index(t)
        knots = np.asarray(self.knot_times)
        k = self.params.xi / self.params.rho
        a = np.asarray(self.leader_accel)[idx]
        w0 = np.asarray(self.leader_speed)[idx] - np.asarray(self.knot_speeds)[:-1][idx]
        tau = t - knots[idx]
        return a / k + (w0 - a / k) * np.exp(-k * tau)

    def _leader_state(self, t):
        idx = self._sub_index(t)
        knots = np.asarray(self.knot_times)
        tau = t - knots[idx]
        a = np.asarray(self.leader_accel)[idx]
        v0 = np.asarray(self.leader_speed)[idx]
        p0 = np.asarray(self.leader_pos)[idx]
        return p0 + v0 * tau + 0.5 * a * tau**2, v0 + a * tau

    def control(self, t):
        return (self.params.xi / self.params.rho) * self._w(t)

    def speed(self, t):
        _, v_k = self._leader_state(t)
        return v_k - self._w(t)

    def position(self, t):
        p_k, _ = self._leader_state(t)
        return p_k - (self.params.gamma + self.params.rho * self.speed(t)) / self.params.xi

    def cost(self) -> float:
        """Closed-form (1/2) * integral of u^2 over the segment."""
        k = self.params.xi / self.params.rho
        total = 0.0
        for i, (ta, tb) in enumerate(zip(self.knot_times, self.knot_times[1:])):
            a = self.leader_accel[i]
            w0 = self.leader_speed[i] - self.knot_speeds[i]
            big_a = k * w0 - a
            delta = tb - ta
            total += (a**2 * delta
                      + 2.0 * a * big_a * (1.0 - math.exp(-k * delta)) / k
                      + big_a**2 * (1.0 - math.exp(-2.0 * k * delta)) / (2.0 * k))
        return 0.5 * total


def _leader_accel_at(leader: LeaderProfile, t: float) -> float:
    return leader.segments[leader.segment_index(t + 1e-12)].accel


def gap_margin(follower: Trajectory, leader: LeaderProfile, params: SafetyParams,
               step: float = 0.1) -> GapMargin:
    """Sample the margin on a uniform grid; +inf once the leader has exited."""
    if step <= 0:
        raise ValueError(f"grid step must be positive, got {step:g}")
    if follower.t_start < leader.start_time - 1e-9:
        raise ValueError("leader profile starts after the follower trajectory")
    n = max(1, round((follower.t_end - follower.t_start) / step))
    times = follower.t_start + step * np.arange(n + 1)
    times[-1] = min(times[-1], follower.t_end)
    _, v, p = sample_trajectory(follower, times)
    p_k, _ = leader_eval(leader, times)
    values = params.xi * (p_k - p) - (params.gamma + params.rho * v)
    values[times > leader.exit_time + 1e-12] = np.inf
    return GapMargin(times, values)


def sample_trajectory(traj: Trajectory, times: np.ndarray):
    """(u, v, p) arrays over a time grid; junctions resolve to the later segment."""
    times = np.asarray(times, dtype=float)
    u = np.empty_like(times)
    v = np.empty_like(times)
    p = np.empty_like(times)
    starts = np.array([s.t_start for s in traj.segments])
    idx = np.clip(np.searchsorted(starts, times, side="right") - 1, 0,
                  len(traj.segments) - 1)
    for i, seg in enumerate(traj.segments):
        mask = idx == i
        if mask.any():
            t = times[mask]
            u[mask] = seg.control(t)
            v[mask] = seg.speed(t)
            p[mask] = seg.position(t)
    return u, v, p


# --- exact margin analysis -------------------------------------------------
#
# Against a constant-acceleration leader span, the margin along a polynomial
# arc is a cubic in t, so minima and zero crossings are available exactly.
# Windows are processed as flat arrays; only windows that actually dip need
# per-window root extraction.

def _margin_window_table(traj: Trajectory, leader: LeaderProfile,
                         params: SafetyParams):
    """Flat arrays (ta, tb, k3, k2, k1, k0) over every smooth margin window."""
    starts, p0s, v0s, accs = leader._arrays
    xi, rho, gamma = params.xi, params.rho, params.gamma
    cols = []
    for seg in traj.segments:
        if not isinstance(seg, PolynomialArc):
            continue   # constrained segments hold margin == 0 identically
        hi_t = min(seg.t_end, leader.exit_time)
        if seg.t_start >= hi_t - 1e-12:
            continue
        lo = np.searchsorted(starts, seg.t_start, side="right")
        hi = np.searchsorted(starts, hi_t, side="left")
        cuts = np.concatenate([[seg.t_start], starts[lo:hi], [hi_t]])
        ta, tb = cuts[:-1], cuts[1:]
        keep = tb - ta > 1e-12
        ta, tb = ta[keep], tb[keep]
        idx = np.clip(np.searchsorted(starts, ta, side="right") - 1, 0,
                      len(starts) - 1)
        a_k, ts, vs, ps = accs[idx], starts[idx], v0s[idx], p0s[idx]
        a1 = vs - a_k * ts
        a0 = ps - vs * ts + 0.5 * a_k * ts**2
        k3 = np.full_like(ta, -xi * seg.alpha / 6.0)
        k2 = xi * 0.5 * a_k - xi * seg.c / 2.0 - rho * seg.alpha / 2.0
        k1 = xi * a1 - xi * seg.d - rho * seg.c
        k0 = xi * a0 - xi * seg.e - gamma - rho * seg.d
        cols.append(np.stack([ta, tb, k3, k2, k1, k0]))
    if not cols:
        return np.zeros((6, 0))
    return np.concatenate(cols, axis=1)


def _window_minima(table: np.ndarray):
    """Per-window minimizer and minimum of the cubic margin."""
    ta, tb, k3, k2, k1, k0 = table

    def value(t):
        return ((k3 * t + k2) * t + k1) * t + k0

    quad_a, quad_b, quad_c = 3.0 * k3, 2.0 * k2, k1
    is_quad = np.abs(quad_a) > 1e-300
    safe_a = np.where(is_quad, quad_a, 1.0)
    disc = quad_b**2 - 4.0 * quad_a * quad_c
    sqrt_disc = np.sqrt(np.maximum(disc, 0.0))
    ok = is_quad & (disc >= 0.0)
    r1 = np.where(ok, (-quad_b - sqrt_disc) / (2.0 * safe_a), ta)
    r2 = np.where(ok, (-quad_b + sqrt_disc) / (2.0 * safe_a), ta)
    is_lin = ~is_quad & (np.abs(quad_b) > 1e-300)
    rlin = np.where(is_lin, -quad_c / np.where(is_lin, quad_b, 1.0), ta)
    cands = [ta, tb]
    for r in (r1, r2, rlin):
        cands.append(np.clip(r, ta, tb))
    t_mat = np.stack(cands)
    v_mat = value(t_mat)
    j = np.argmin(v_mat, axis=0)
    cols = np.arange(t_mat.shape[1])
    return t_mat[j, cols], v_mat[j, cols]


def _real_roots_in(coefs: np.ndarray, ta: float, tb: float) -> list[float]:
    nz = np.nonzero(np.abs(coefs) > 1e-300)[0]
    if len(nz) == 0:
        return []
    roots = np.roots(coefs[nz[0]:])
    out = [float(r.real) for r in roots
           if abs(r.imag) < 1e-9 and ta - 1e-12 <= r.real <= tb + 1e-12]
    return sorted(out)


def min_margin(traj: Trajectory, leader: LeaderProfile,
               params: SafetyParams) -> tuple[float, float]:
    """Exact minimum of the margin over the trajectory: (time, value)."""
    table = _margin_window_table(traj, leader, params)
    if table.shape[1] == 0:
        return traj.t_start, np.inf
    t_min, v_min = _window_minima(table)
    j = int(np.argmin(v_min))
    return float(t_min[j]), float(v_min[j])


def violation_intervals(traj: Trajectory, leader: LeaderProfile, params: SafetyParams,
                        tol: float = _VIOLATION_TOL) -> list[tuple[float, float]]:
    """Maximal intervals where the margin sits below tol, found from cubic roots."""
    table = _margin_window_table(traj, leader, params)
    if table.shape[1] == 0:
        return []
    _, v_min = _window_minima(table)
    flagged = np.nonzero(v_min < tol)[0]
    raw = []
    for j in flagged:
        ta, tb, k3, k2, k1, k0 = table[:, j]
        coefs = np.array([k3, k2, k1, k0 - tol])
        cuts = sorted({ta, tb} | set(_real_roots_in(coefs, ta, tb)))
        for a, b in zip(cuts, cuts[1:]):
            if b - a < 1e-12:
                continue
            mid = 0.5 * (a + b)
            if ((k3 * mid + k2) * mid + k1) * mid + k0 < tol:
                raw.append((a, b))
    merged: list[list[float]] = []
    for a, b in sorted(raw):
        if merged and a <= merged[-1][1] + 1e-9:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


# --- junction search -------------------------------------------------------

def _terminal_rows(last: int, t_f: float, p_f: float):
    return [([(last, "p", t_f, 1.0)], p_f), ([(last, "u", t_f, 1.0)], 0.0)]


def _tangency_rows(last: int, t1: float, leader: LeaderProfile, params: SafetyParams):
    """margin(t1) = 0 and margin'(t1) = 0 written against the last upstream arc."""
    ls = leader_state_at(leader, t1)
    xi, rho, gamma = params.xi, params.rho, params.gamma
    return [([(last, "p", t1, -xi), (last, "v", t1, -rho)], gamma - xi * ls.position),
            ([(last, "v", t1, -xi), (last, "u", t1, -rho)], -xi * ls.speed)]


@dataclass
class _Piece:
    """One assembled candidate: upstream arcs, constrained segment, downstream arcs."""

    upstream: list
    segment: ConstrainedSegment
    downstream: list

    def cost(self) -> float:
        return (sum(arc_cost(a) for a in self.upstream) + self.segment.cost()
                + sum(arc_cost(a) for a in self.downstream))

    def exit_mismatch(self) -> float:
        t2 = self.segment.t_end
        return self.downstream[0].control(t2) - self.segment.control(t2)


class _WindowSolver:
    """Nested 1-D solves for one constrained window between fixed waypoint groups."""

    def __init__(self, entry, pre, post, terminal, leader, params):
        self.entry = entry                    # (t, p, v)
        self.pre = tuple(pre)                 # waypoints before the window
        self.post = tuple(post)               # waypoints after the window
        self.t_f, self.p_f = terminal
        self.leader = leader
        self.params = params

    def _upstream(self, t1):
        rows = _tangency_rows(len(self.pre), t1, self.leader, self.params)
        return solve_chain_through(self.entry, self.pre, rows, t1)

    def _downstream(self, t2, state, waypoints):
        rows = _terminal_rows(len(waypoints), self.t_f, self.p_f)
        return solve_chain_through((t2, *state), waypoints, rows, self.t_f)

    def _t2_cap(self, skip_first_post: bool) -> float:
        cap = min(self.t_f - _T_MIN, self.leader.exit_time)
        post = self.post[1:] if skip_first_post else self.post
        if post:
            cap = min(cap, post[0].time - _T_MIN)
        return cap

    def _shared_segment(self, t1, upstream, t_end):
        """One constrained segment spanning the whole t2 scan; prefixes are valid."""
        v1 = upstream[-1].speed(t1)
        return ConstrainedSegment.build(t1, t_end, v1, self.leader, self.params)

    def _candidate(self, t1, t2, skip_first_post=False) -> _Piece:
        upstream = self._upstream(t1)
        seg = self._shared_segment(t1, upstream, t2)
        waypoints = self.post[1:] if skip_first_post else self.post
        if skip_first_post:
            wp = self.post[0]
            if abs(seg.position(wp.time) - wp.position) > 1e-6:
                raise SolverError("constrained segment misses the straddled waypoint")
            if wp.speed is not None and abs(seg.speed(wp.time) - wp.speed) > 1e-6:
                raise InfeasibleRouteError(
                    "pinned waypoint speed unreachable inside constrained window",
                    time=wp.time)
        down = self._downstream(t2, (seg.position(t2), seg.speed(t2)), waypoints)
        return _Piece(upstream, seg, down)

    def _solve_t2(self, t1, upstream, t2_lo, t2_hi, skip_first_post=False) -> float | None:
        """Exit time from control continuity at t2, bracketed on a scan grid."""
        try:
            seg = self._shared_segment(t1, upstream, t2_hi)
        except (SolverError, InfeasibleRouteError):
            return None
        waypoints = self.post[1:] if skip_first_post else self.post

        def resid(t2):
            down = self._downstream(t2, (seg.position(t2), seg.speed(t2)), waypoints)
            return down[0].control(t2) - seg.control(t2)

        grid = np.linspace(t2_lo, t2_hi, 40)
        vals = []
        for t2 in grid:
            try:
                vals.append(resid(t2))
            except (SolverError, InfeasibleRouteError):
                vals.append(np.nan)
        vals = np.array(vals)
        for i in range(len(grid) - 1):
            a, b = vals[i], vals[i + 1]
            if np.isnan(a) or np.isnan(b):
                continue
            if a == 0.0:
                return float(grid[i])
            if a * b < 0:
                return float(brentq(resid, grid[i], grid[i + 1], xtol=1e-10))
        return None

    def solve(self, ta, tb):
        """Window inside one inter-waypoint gap; returns the best _Piece or None."""
        t1_lo = (self.pre[-1].time if self.pre else self.entry[0]) + _T_MIN
        t1_hi = min(tb, self._t2_cap(False)) - _T_MIN
        if t1_hi <= t1_lo:
            return None

        def assemble(t1) -> _Piece | None:
            try:
                upstream = self._upstream(t1)
            except (SolverError, InfeasibleRouteError):
                return None
            t2 = self._solve_t2(t1, upstream, t1 + _T_MIN, self._t2_cap(False))
            if t2 is None:
                return None
            try:
                return self._candidate(t1, t2)
            except (SolverError, InfeasibleRouteError):
                return None

        def cost_at(t1) -> float:
            piece = assemble(t1)
            return piece.cost() if piece is not None else np.nan

        delta = 1e-4

        def stationarity(t1):
            return (cost_at(t1 + delta) - cost_at(t1 - delta)) / (2 * delta)

        grid = np.linspace(t1_lo + delta, t1_hi - delta, 25)
        vals = np.array([stationarity(t) for t in grid])
        t1_best = None
        for i in range(len(grid) - 1):
            a, b = vals[i], vals[i + 1]
            if np.isnan(a) or np.isnan(b):
                continue
            if a * b <= 0 and (a != 0 or b != 0):
                t1_best = float(brentq(stationarity, grid[i], grid[i + 1], xtol=1e-6))
                break
        if t1_best is None:
            ok = ~np.isnan(vals)
            if not ok.any():
                return None
            # fall back to direct cost minimization on the feasible span
            feas = grid[ok]
            costs = np.array([cost_at(t) for t in feas])
            j = int(np.nanargmin(costs))
            lo = feas[max(0, j - 1)]
            hi = feas[min(len(feas) - 1, j + 1)]
            res = minimize_scalar(cost_at, bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-6})
            t1_best = float(res.x)
        return assemble(t1_best)

    def solve_straddle(self, ta, tb):
        """Window crossing self.post[0]: t1 pinned by the waypoint on the segment."""
        wp = self.post[0]
        t1_lo = (self.pre[-1].time if self.pre else self.entry[0]) + _T_MIN
        t1_hi = min(wp.time, tb) - _T_MIN
        if t1_hi <= t1_lo:
            return None

        def wp_resid(t1):
            upstream = self._upstream(t1)
            seg = self._shared_segment(t1, upstream, wp.time)
            return seg.position(wp.time) - wp.position

        grid = np.linspace(t1_lo, t1_hi, 40)
        vals = []
        for t1 in grid:
            try:
                vals.append(wp_resid(t1))
            except (SolverError, InfeasibleRouteError):
                vals.append(np.nan)
        vals = np.array(vals)
        t1 = None
        for i in range(len(grid) - 1):
            a, b = vals[i], vals[i + 1]
            if np.isnan(a) or np.isnan(b):
                continue
            if a * b <= 0:
                t1 = float(brentq(wp_resid, grid[i], grid[i + 1], xtol=1e-10))
                break
        if t1 is None:
            return None
        try:
            upstream = self._upstream(t1)
        except (SolverError, InfeasibleRouteError):
            return None
        t2 = self._solve_t2(t1, upstream, wp.time + _T_MIN, self._t2_cap(True),
                            skip_first_post=True)
        if t2 is None:
            return None
        try:
            return self._candidate(t1, t2, skip_first_post=True)
        except (SolverError, InfeasibleRouteError):
            return None


def _solve_safe_segments(entry, waypoints, terminal, leader, params, depth=0) -> list:
    """Arcs plus constrained windows that keep the margin nonnegative, greedily.

    When the first violation sits between waypoints, both candidate window
    structures (inside the gap, or straddling the next waypoint) are pursued
    end to end and the cheaper feasible assembly wins.
    """
    t_f, p_f = terminal
    arcs = solve_chain_through(entry, waypoints, _terminal_rows(len(waypoints), t_f, p_f),
                               t_f)
    traj = Trajectory.from_segments(arcs)
    bad = violation_intervals(traj, leader, params)
    if not bad:
        return list(arcs)
    if depth >= 3:
        raise InfeasibleRouteError("more constrained windows than supported",
                                   time=bad[0][0])
    ta, tb = bad[0]
    if ta <= entry[0] + _T_MIN:
        raise InfeasibleRouteError("margin violated at the entry state", time=entry[0])
    pre = tuple(w for w in waypoints if w.time <= ta)
    post = tuple(w for w in waypoints if w.time > ta)
    solver = _WindowSolver(entry, pre, post, terminal, leader, params)
    pieces = [p for p in (solver.solve(ta, tb),) if p is not None]
    if post:
        straddle = solver.solve_straddle(ta, tb)
        if straddle is not None:
            pieces.append(straddle)
    assemblies = []
    for piece in pieces:
        seg = piece.segment
        remaining = tuple(w for w in post if w.time > seg.t_end)
        state2 = (seg.t_end, seg.position(seg.t_end), seg.speed(seg.t_end))
        try:
            downstream = _solve_safe_segments(state2, remaining, terminal, leader,
                                              params, depth + 1)
        except InfeasibleRouteError:
            continue
        assemblies.append(list(piece.upstream) + [seg] + downstream)
    if not assemblies:
        raise InfeasibleRouteError("no admissible junction times found", time=ta)
    return min(assemblies, key=lambda segs: Trajectory.from_segments(segs).cost)


def piece_constrained_route(problem: RoutePlanProblem,
                            base: Trajectory | None = None) -> Trajectory:
    """Resolve margin violations of the unconstrained plan with constrained windows."""
    if problem.safety is None:
        raise ValueError("problem has no safety context")
    leader, params = problem.safety
    sched = problem.schedule
    entry = (sched.entry_time, sched.entry_position, sched.entry_speed)
    segments = _solve_safe_segments(entry, sched.waypoints,
                                    (sched.terminal_time, sched.terminal_position),
                                    leader, params)
    traj = Trajectory.from_segments(segments)
    _, worst = min_margin(traj, leader, params)
    if worst < _VIOLATION_TOL:
        raise InfeasibleRouteError(
            f"pieced trajectory still violates the margin ({worst:.2e} m)",
            time=min_margin(traj, leader, params)[0])
    return traj


def _with_leader(problem: RoutePlanProblem, leader: LeaderProfile | None):
    if leader is None:
        return problem
    params = problem.safety[1] if problem.safety else SafetyParams()
    return RoutePlanProblem(problem.schedule, problem.vehicle, (leader, params))


def find_junction_times(problem: RoutePlanProblem,
                        leader: LeaderProfile | None = None) -> tuple[float, float]:
    """Entry and exit times of the first constrained window of the pieced route."""
    problem = _with_leader(problem, leader)
    traj = piece_constrained_route(problem)
    for seg in traj.segments:
        if isinstance(seg, ConstrainedSegment):
            return seg.t_start, seg.t_end
    raise InfeasibleRouteError("unconstrained solution does not violate the margin")


def piece_case4(problem: RoutePlanProblem,
                leader: LeaderProfile | None = None) -> Trajectory:
    """Constrained piecing for routes with interior waypoints.

    Orders the window against the waypoint times (before, after, or straddling
    a waypoint) and keeps every waypoint, terminal and safety condition.  With
    no margin violation this degrades to the plain interior solution.
    """
    if not problem.schedule.waypoints:
        raise ValueError("piece_case4 needs at least one interior waypoint")
    from .routes import solve_route
    return solve_route(_with_leader(problem, leader))
