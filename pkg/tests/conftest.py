from pathlib import Path

import pytest
from hypothesis import settings

from corridor_opt.routes import RoutePlanProblem
from corridor_opt.scenario import load_scenario, schedule_from_zone_times

settings.register_profile("suite", max_examples=50, deadline=None)
settings.load_profile("suite")

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
FIXTURE_DIR = Path(__file__).resolve().parent / "fixtures"

GOLDEN_NAMES = ("case1", "case2", "case3", "case4")


def scenario_path(name: str) -> Path:
    return SCENARIO_DIR / f"{name}.yaml"


def golden_problem(name: str, with_leader: bool = True) -> RoutePlanProblem:
    """Route problem for a shipped single-vehicle scenario."""
    spec = load_scenario(scenario_path(name))
    veh = spec.vehicles[0]
    sched = schedule_from_zone_times(spec, veh, veh.zone_times)
    safety = (spec.leader, veh.safety) if (with_leader and spec.leader) else None
    return RoutePlanProblem(sched, veh.params, safety)


@pytest.fixture(scope="session")
def golden_specs():
    return {name: load_scenario(scenario_path(name)) for name in GOLDEN_NAMES}
