"""Command-line entry point.

Verbs: solve, simulate, compare, oracle-check, plot.
Exit codes: 0 success, 2 scenario parse/validation error, 3 infeasible,
4 tolerance failure in oracle-check.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .metrics import RunReport, compare_runs, total_fuel
from .model import SafetyParams
from .oracle import OracleError, solve_transcribed
from .routes import (InfeasibleRouteError, RoutePlanProblem, Trajectory,
                     bound_violations, solve_route)
from .safety import ConstrainedSegment, min_margin, sample_trajectory
from .scenario import ScenarioError, ScenarioSpec, load_scenario, schedule_from_zone_times
from .sim import SimConfig, assign_schedule, build_report, make_initial_state, run_sim, \
    trajectory_to_profile

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_TOLERANCE = 4

CSV_HEADER = "vehicle_id,t,p,v,u,margin"


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:.9g}"


def _write_csv(path: Path, rows) -> None:
    lines = [CSV_HEADER]
    lines += [",".join([str(int(r[0]))] + [_fmt(v) for v in r[1:]]) for r in rows]
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _solve_scenario_vehicles(spec: ScenarioSpec):
    """Solve every vehicle in order; each follows the previous one's plan."""
    solved = []
    prev_traj: Trajectory | None = None
    from .sim import SimState
    state = SimState(clock=0.0, pending=[])
    for veh in spec.vehicles:
        if veh.zone_times is not None:
            sched = schedule_from_zone_times(spec, veh, veh.zone_times)
        else:
            from .sim import VehicleRecord
            state.pending = [VehicleRecord(veh.id, veh.arrival_time, veh.v0,
                                           veh.params, veh.safety)]
            sched = assign_schedule(state, veh.id, spec.scheduler, spec,
                                    entry_time=veh.arrival_time)
        if prev_traj is not None:
            safety_ctx = (trajectory_to_profile(prev_traj), veh.safety)
        elif spec.leader is not None:
            safety_ctx = (spec.leader, veh.safety)
        else:
            safety_ctx = None
        problem = RoutePlanProblem(sched, veh.params, safety_ctx)
        traj = solve_route(problem)
        solved.append((veh, problem, traj))
        prev_traj = traj
    return solved


def _sample_rows(veh_id: int, traj: Trajectory, safety_ctx, dt: float):
    n = max(1, round((traj.t_end - traj.t_start) / dt))
    times = traj.t_start + dt * np.arange(n + 1)
    times[-1] = traj.t_end
    u, v, p = sample_trajectory(traj, times)
    margin = np.full_like(times, np.inf)
    if safety_ctx is not None:
        from .model import leader_eval
        profile, sp = safety_ctx
        mask = times <= profile.exit_time + 1e-12
        p_k, _ = leader_eval(profile, times[mask])
        margin[mask] = sp.xi * (p_k - p[mask]) - (sp.gamma + sp.rho * v[mask])
    return [(veh_id, t, pp, vv, uu, mm)
            for t, pp, vv, uu, mm in zip(times, p, v, u, margin)]


def cmd_solve(args) -> int:
    spec = load_scenario(args.scenario)
    dt = args.dt if args.dt else spec.dt
    solved = _solve_scenario_vehicles(spec)
    rows, veh_reports = [], []
    for veh, problem, traj in solved:
        rows += _sample_rows(veh.id, traj, problem.safety, dt)
        fuel_times = np.arange(traj.t_start, traj.t_end + 1e-9, 1.0)
        fu, fv, _ = sample_trajectory(traj, fuel_times)
        entry = {
            "id": veh.id,
            "cost": traj.cost,
            "entry_time": traj.t_start,
            "terminal_time": traj.t_end,
            "travel_time": traj.t_end - traj.t_start,
            "fuel": total_fuel(fv, fu, spec.fuel, 1.0) if len(fv) >= 2 else 0.0,
            "junction_times": list(traj.junction_times()),
            "constrained_windows": [[s.t_start, s.t_end] for s in traj.segments
                                    if isinstance(s, ConstrainedSegment)],
            "bound_violations": [[t, kind, val] for t, kind, val in
                                 bound_violations(traj, veh.params)],
        }
        if problem.safety is not None:
            t_min, m_min = min_margin(traj, *problem.safety)
            entry["min_margin"] = m_min
            entry["min_margin_time"] = t_min
        veh_reports.append(entry)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "trajectory.csv", rows)
    _write_json(out / "report.json", {"schema_version": 1, "scenario_id": spec.name,
                                      "mode": "solve", "vehicles": veh_reports})
    if args.plots:
        from .plots import plot_samples
        plot_samples(_rows_to_array(rows), out / "trajectory.svg", title=spec.name)
    print(f"solved {len(solved)} vehicle(s); outputs in {out}")
    return EXIT_OK


def _rows_to_array(rows) -> np.ndarray:
    return np.array([[r[0], r[1], r[2], r[3], r[4], r[5]] for r in rows])


def cmd_simulate(args) -> int:
    spec = load_scenario(args.scenario)
    config = SimConfig.from_scenario(spec, mode=args.mode, seed=args.seed, dt=args.dt)
    state = run_sim(config)
    report = build_report(state, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "samples.csv",
               [(vid, t, p, v, u, m) for t, vid, p, v, u, m in state.samples])
    (out / "events.jsonl").write_text(
        "\n".join(json.dumps(e, sort_keys=True) for e in state.events) + "\n")
    _write_json(out / "report.json", report.to_dict())
    if args.plots:
        from .plots import plot_samples
        plot_samples(_rows_to_array([(vid, t, p, v, u, m)
                                     for t, vid, p, v, u, m in state.samples]),
                     out / "samples.svg", title=f"{spec.name} ({config.mode})")
    print(f"simulated {len(state.done)} vehicle(s) to {state.clock:.1f} s; "
          f"outputs in {out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    spec = load_scenario(args.scenario)
    out = Path(args.out)
    reports: dict[str, RunReport] = {}
    payloads = {}
    for mode in ("baseline", "optimal"):
        config = SimConfig.from_scenario(spec, mode=mode, seed=args.seed, dt=args.dt)
        state = run_sim(config)
        reports[mode] = build_report(state, config)
        payloads[mode] = reports[mode].to_dict()
    summary = compare_runs(reports["baseline"], reports["optimal"])
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "report_baseline.json", payloads["baseline"])
    _write_json(out / "report_optimal.json", payloads["optimal"])
    _write_json(out / "comparison.json", summary)
    print(f"fuel savings (optimal vs baseline): {summary['fuel_savings_pct']:.1f}%")
    print(f"violation events: baseline {summary['violation_counts'][0]}, "
          f"optimal {summary['violation_counts'][1]}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    spec = load_scenario(args.scenario)
    if len(spec.vehicles) > 3:
        raise ScenarioError("oracle-check expects a scenario with at most 3 vehicles")
    solved = _solve_scenario_vehicles(spec)
    worst = 0.0
    print(f"{'vehicle':>8} {'analytic':>14} {'oracle':>14} {'rel err':>10}")
    for veh, problem, traj in solved:
        _, oracle_cost = solve_transcribed(problem, n_steps=args.steps)
        scale = max(abs(oracle_cost), 1e-9)
        rel = abs(traj.cost - oracle_cost) / scale
        worst = max(worst, rel)
        print(f"{veh.id:>8} {traj.cost:>14.6e} {oracle_cost:>14.6e} {rel:>10.2e}")
    if worst > args.tol:
        print(f"FAIL: worst relative error {worst:.2e} exceeds {args.tol:g}")
        return EXIT_TOLERANCE
    print(f"OK: worst relative error {worst:.2e}")
    return EXIT_OK


def cmd_plot(args) -> int:
    csv = Path(args.csv)
    if not csv.exists():
        raise ScenarioError(f"no such CSV file: {csv}")
    data = np.genfromtxt(csv, delimiter=",", skip_header=1)
    if data.ndim == 1:
        data = data[None, :]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    from .plots import plot_samples
    target = out / (csv.stem + ".svg")
    plot_samples(data, target, title=csv.stem)
    print(f"wrote {target}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corridor-opt",
        description="Energy-optimal corridor trajectories: solve, simulate, compare.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_out=True):
        p.add_argument("--scenario", required=True, help="scenario YAML file")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("solve", help="solve scheduled trajectories for each vehicle")
    add_common(p)
    p.add_argument("--dt", type=float, default=None, help="CSV sampling step [s]")
    p.add_argument("--plots", action="store_true", help="also write SVG plots")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="run the time-stepped corridor simulation")
    add_common(p)
    p.add_argument("--mode", choices=["optimal", "baseline"], default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dt", type=float, default=None, help="simulation step [s]")
    p.add_argument("--plots", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run baseline and optimal modes and compare")
    add_common(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle-check",
                       help="cross-check analytic costs against direct transcription")
    add_common(p, needs_out=False)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-2)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("plot", help="render a trajectory CSV to SVG")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as err:
        print(f"scenario error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasibleRouteError as err:
        detail = f" (t={err.time:.3f} s)" if err.time is not None else ""
        print(f"infeasible: {err}{detail}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OracleError as err:
        print(f"oracle failure: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
