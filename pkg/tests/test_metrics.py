import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corridor_opt.metrics import (FuelCoefficients, RunReport, VehicleReport,
                                  compare_runs, fuel_rate, total_fuel)
from corridor_opt.model import ScheduleAssignment, Waypoint
from corridor_opt.routes import RoutePlanProblem, solve_route
from corridor_opt.safety import sample_trajectory

KAMAL = FuelCoefficients(q0=0.1569, q1=2.450e-2, q2=-7.415e-4, q3=5.975e-5,
                         r0=0.07224, r1=9.681e-2, r2=1.075e-3)


class TestFuelRate:
    def test_all_zero_coefficients(self):
        assert fuel_rate(10.0, 1.0, FuelCoefficients()) == 0.0

    def test_idle_rate_is_constant_term(self):
        assert fuel_rate(0.0, 0.0, KAMAL) == pytest.approx(KAMAL.q0)

    def test_braking_gets_no_fuel_credit(self):
        cruise_only = fuel_rate(12.0, 0.0, KAMAL)
        assert fuel_rate(12.0, -2.0, KAMAL) == pytest.approx(cruise_only)

    @given(st.floats(0.0, 35.0), st.floats(-8.0, 8.0))
    def test_nonnegative(self, v, u):
        assert fuel_rate(v, u, KAMAL) >= 0.0


class TestTotalFuel:
    def test_constant_cruise(self):
        rate = fuel_rate(10.0, 0.0, KAMAL)
        speeds = np.full(11, 10.0)
        accels = np.zeros(11)
        assert total_fuel(speeds, accels, KAMAL, dt=1.0) == pytest.approx(10 * rate)

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValueError):
            total_fuel([10.0], [0.0], KAMAL)

    def test_additive_over_concatenation(self):
        rng = np.random.default_rng(0)
        speeds = rng.uniform(5.0, 20.0, 21)
        accels = rng.uniform(-2.0, 2.0, 21)
        whole = total_fuel(speeds, accels, KAMAL)
        part = total_fuel(speeds[:11], accels[:11], KAMAL) \
            + total_fuel(speeds[10:], accels[10:], KAMAL)
        assert whole == pytest.approx(part, rel=1e-12)

    def test_smooth_plan_beats_stop_and_go(self):
        smooth = solve_route(RoutePlanProblem(
            ScheduleAssignment(0.0, 12.0, (), 26.0, 300.0)))
        # same endpoints, but forced to crawl through the middle
        jerky = solve_route(RoutePlanProblem(
            ScheduleAssignment(0.0, 12.0, (Waypoint(16.0, 120.0, 6.0),), 26.0, 300.0)))
        times = np.arange(0.0, 26.0 + 1e-9, 1.0)
        fuels = []
        for traj in (smooth, jerky):
            u, v, _ = sample_trajectory(traj, times)
            fuels.append(total_fuel(v, u, KAMAL, dt=1.0))
        assert fuels[0] < fuels[1]


def _report(scenario, mode, fuels, travel_times, violations=0):
    rep = RunReport(scenario_id=scenario, mode=mode)
    for i, (f, tt) in enumerate(zip(fuels, travel_times), start=1):
        rep.vehicles.append(VehicleReport(i, 0.0, 0.0, tt, tt, f))
    rep.violations = [(1, 0.0, -0.01)] * violations
    return rep


class TestCompareRuns:
    def test_self_comparison_is_all_zero(self):
        a = _report("s", "baseline", [10.0, 12.0], [30.0, 31.0])
        out = compare_runs(a, a)
        assert out["fuel_savings_pct"] == pytest.approx(0.0)
        assert out["travel_time_savings_pct"] == pytest.approx(0.0)
        assert out["violation_delta"] == 0

    def test_fuel_savings_arithmetic(self):
        a = _report("s", "baseline", [100.0], [30.0])
        b = _report("s", "optimal", [59.0], [30.0])
        out = compare_runs(a, b)
        assert out["fuel_savings_pct"] == pytest.approx(41.0, abs=1e-3)

    def test_scenario_mismatch_rejected(self):
        a = _report("s", "baseline", [], [])
        b = _report("other", "optimal", [10.0], [30.0])
        with pytest.raises(ValueError):
            compare_runs(a, b)
