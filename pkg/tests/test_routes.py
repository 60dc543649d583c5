import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corridor_opt.model import ScheduleAssignment, VehicleParams, Waypoint
from corridor_opt.oracle import solve_transcribed
from corridor_opt.routes import (InfeasibleRouteError, RoutePlanProblem,
                                 bound_violations, solve_interior_bvp, solve_route)

from conftest import golden_problem


def case3_problem():
    sched = ScheduleAssignment(0.0, 12.0, (Waypoint(15.0, 150.0),), 26.0, 300.0)
    return RoutePlanProblem(sched)


class TestInteriorBvp:
    def test_case3_decelerate_then_accelerate(self):
        traj = solve_interior_bvp(case3_problem())
        first, second = traj.segments
        assert first.control(0.0) < 0 < first.control(15.0)
        assert second.control(15.0) > 0

    def test_waypoint_on_constant_speed_line(self):
        sched = ScheduleAssignment(0.0, 10.0, (Waypoint(15.0, 150.0),), 30.0, 300.0)
        traj = solve_interior_bvp(RoutePlanProblem(sched))
        for t in np.linspace(0.0, 30.0, 61):
            assert abs(traj.control(t)) < 1e-10

    def test_case3_continuity_and_oracle(self):
        prob = case3_problem()
        traj = solve_interior_bvp(prob)
        first, second = traj.segments
        assert abs(first.position(15.0) - 150.0) <= 1e-6
        assert abs(second.position(15.0) - 150.0) <= 1e-6
        assert abs(first.speed(15.0) - second.speed(15.0)) <= 1e-6
        assert abs(first.control(15.0) - second.control(15.0)) <= 1e-6
        _, oracle_cost = solve_transcribed(prob, n_steps=1000)
        assert traj.cost == pytest.approx(oracle_cost, rel=1e-3)

    def test_pinned_waypoint_speed_allows_control_jump(self):
        sched = ScheduleAssignment(0.0, 12.0, (Waypoint(15.0, 150.0, 11.0),),
                                   26.0, 300.0)
        traj = solve_interior_bvp(RoutePlanProblem(sched))
        first, second = traj.segments
        assert first.speed(15.0) == pytest.approx(11.0, abs=1e-9)
        assert second.speed(15.0) == pytest.approx(11.0, abs=1e-9)
        assert abs(first.control(15.0) - second.control(15.0)) > 1e-3

    def test_zero_duration_arc_rejected(self):
        sched = ScheduleAssignment(0.0, 12.0, (Waypoint(0.0, 150.0),), 26.0, 300.0)
        with pytest.raises(InfeasibleRouteError):
            solve_interior_bvp(RoutePlanProblem(sched))

    def test_multiple_waypoints(self):
        sched = ScheduleAssignment(0.0, 12.0,
                                   (Waypoint(9.0, 100.0), Waypoint(18.0, 210.0)),
                                   26.0, 300.0)
        prob = RoutePlanProblem(sched)
        traj = solve_interior_bvp(prob)
        assert traj.position(9.0) == pytest.approx(100.0, abs=1e-6)
        assert traj.position(18.0) == pytest.approx(210.0, abs=1e-6)
        _, oracle_cost = solve_transcribed(prob, n_steps=1200)
        assert traj.cost == pytest.approx(oracle_cost, rel=1e-3)


class TestSolveRoute:
    def test_case1_single_free_arc(self):
        traj = solve_route(golden_problem("case1"))
        assert len(traj.segments) == 1
        assert traj.position(26.0) == pytest.approx(300.0, abs=1e-9)

    def test_case3_unconstrained_with_leader(self):
        traj = solve_route(golden_problem("case3"))
        assert len(traj.segments) == 2

    def test_infeasible_schedule_reports_time(self):
        sched = ScheduleAssignment(0.0, 12.0, (Waypoint(0.0, 150.0),), 26.0, 300.0)
        with pytest.raises(InfeasibleRouteError) as err:
            solve_route(RoutePlanProblem(sched))
        assert err.value.time is not None


class TestTrajectory:
    def test_eval_outside_span_rejected(self):
        traj = solve_route(golden_problem("case1"))
        with pytest.raises(ValueError):
            traj.eval(27.0)

    def test_junction_times(self):
        traj = solve_interior_bvp(case3_problem())
        assert traj.junction_times() == (15.0,)


class TestBoundDiagnostics:
    def test_aggressive_schedule_flags_control(self):
        sched = ScheduleAssignment(0.0, 5.0, (), 10.0, 300.0)
        traj = solve_route(RoutePlanProblem(sched))
        flagged = bound_violations(traj, VehicleParams(u_min=-6.0, u_max=3.0))
        assert any(kind == "control" for _, kind, _ in flagged)

    def test_clean_schedule_has_no_flags(self):
        traj = solve_route(golden_problem("case1"))
        assert bound_violations(traj, VehicleParams()) == []


@st.composite
def endpoint_and_waypoint(draw):
    v0 = draw(st.floats(8.0, 15.0))
    t_f = draw(st.floats(20.0, 30.0))
    p_f = draw(st.floats(240.0, 340.0))
    frac_t = draw(st.floats(0.35, 0.65))
    frac_p = draw(st.floats(0.35, 0.65))
    return v0, t_f, p_f, Waypoint(frac_t * t_f, frac_p * p_f)


class TestCostMonotonicity:
    @settings(max_examples=30)
    @given(endpoint_and_waypoint())
    def test_added_waypoint_never_cheaper(self, data):
        v0, t_f, p_f, wp = data
        free = solve_route(RoutePlanProblem(ScheduleAssignment(0.0, v0, (), t_f, p_f)))
        pinned = solve_route(RoutePlanProblem(
            ScheduleAssignment(0.0, v0, (wp,), t_f, p_f)))
        assert pinned.cost >= free.cost - 1e-9
        assert pinned.position(wp.time) == pytest.approx(wp.position, abs=1e-6)
