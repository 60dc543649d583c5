"""Energy-optimal trajectory planning for automated vehicles on a multi-zone corridor."""

from .arcs import (BoundarySpec, PolynomialArc, SolverError, arc_cost, eval_arc,
                   solve_conditions, solve_free_arc, solve_pinned_arc)
from .metrics import (FuelCoefficients, RunReport, VehicleReport, compare_runs,
                      fuel_rate, total_fuel)
from .model import (ConflictZone, CorridorSpec, LeaderProfile, LeaderSegment,
                    SafetyParams, ScheduleAssignment, VehicleParams, VehicleState,
                    Waypoint, leader_state_at, min_safe_distance)
from .oracle import OracleError, TranscribedProblem, solve_transcribed, transcribe
from .routes import (InfeasibleRouteError, RoutePlanProblem, Trajectory,
                     bound_violations, solve_interior_bvp, solve_route)
from .safety import (ConstrainedSegment, GapMargin, constrained_control,
                     find_junction_times, gap_margin, min_margin, piece_case4,
                     piece_constrained_route, sample_trajectory, violation_intervals)
from .scenario import (ArrivalSpec, FifoSchedulerParams, ScenarioError, ScenarioSpec,
                       VehicleEntry, load_scenario, validate_scenario)
from .sim import (IdmParams, SimConfig, SimState, VehicleRecord, assign_schedule,
                  baseline_accel, build_report, make_initial_state, run_sim, step,
                  trajectory_to_profile)

__version__ = "0.1.0"
