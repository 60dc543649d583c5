"""Fuel metamodel, travel-time and safety statistics, run comparison."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class FuelCoefficients:
    """Cruise cubic q0..q3 and acceleration-term quadratic r0..r2 (rate units/s).

    Values are supplied by configuration; the shipped scenario files document
    their source.
    """

    q0: float = 0.0
    q1: float = 0.0
    q2: float = 0.0
    q3: float = 0.0
    r0: float = 0.0
    r1: float = 0.0
    r2: float = 0.0


def fuel_rate(v: float, u: float, coeffs: FuelCoefficients):
    """Instantaneous fuel rate; no credit for braking (u < 0 drops the accel term)."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    cruise = coeffs.q0 + coeffs.q1 * v + coeffs.q2 * v**2 + coeffs.q3 * v**3
    accel = np.maximum(u, 0.0) * (coeffs.r0 + coeffs.r1 * v + coeffs.r2 * v**2)
    out = np.maximum(cruise + accel, 0.0)
    return float(out) if out.ndim == 0 else out


def total_fuel(speeds, accels, coeffs: FuelCoefficients, dt: float = 1.0) -> float:
    """Left-rectangle integral of the fuel rate over uniformly sampled motion.

    The samples are grid points spanning the trajectory, so n samples cover
    n-1 intervals.
    """
    speeds = np.asarray(speeds, dtype=float)
    accels = np.asarray(accels, dtype=float)
    if speeds.size < 2:
        raise ValueError("need at least two samples to integrate fuel")
    if speeds.shape != accels.shape:
        raise ValueError("speed and acceleration samples differ in length")
    rates = fuel_rate(speeds[:-1], accels[:-1], coeffs)
    return float(np.sum(rates) * dt)


@dataclass(frozen=True)
class VehicleReport:
    vehicle_id: int
    arrival_time: float
    entry_time: float
    exit_time: float
    travel_time: float
    fuel: float


@dataclass
class RunReport:
    """Per-vehicle outcomes of one run plus recomputable aggregates."""

    scenario_id: str
    mode: str
    vehicles: list[VehicleReport] = field(default_factory=list)
    violations: list[tuple[int, float, float]] = field(default_factory=list)

    @property
    def total_fuel(self) -> float:
        return sum(v.fuel for v in self.vehicles)

    @property
    def mean_travel_time(self) -> float:
        if not self.vehicles:
            return 0.0
        return float(np.mean([v.travel_time for v in self.vehicles]))

    @property
    def travel_time_variance(self) -> float:
        if len(self.vehicles) < 2:
            return 0.0
        return float(np.var([v.travel_time for v in self.vehicles], ddof=1))

    @property
    def violation_count(self) -> int:
        return len(self.violations)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "scenario_id": self.scenario_id,
            "mode": self.mode,
            "vehicles": [vars(v) for v in self.vehicles],
            "violations": [{"vehicle_id": i, "time": t, "magnitude": m}
                           for i, t, m in self.violations],
            "aggregates": {
                "vehicle_count": len(self.vehicles),
                "total_fuel": self.total_fuel,
                "mean_travel_time": self.mean_travel_time,
                "travel_time_variance": self.travel_time_variance,
                "violation_count": self.violation_count,
            },
        }


def compare_runs(a: RunReport, b: RunReport) -> dict:
    """Percentage deltas of b relative to a; both must describe the same scenario."""
    if a.scenario_id != b.scenario_id:
        raise ValueError(f"cannot compare different scenarios "
                         f"({a.scenario_id!r} vs {b.scenario_id!r})")

    def savings_pct(ref: float, new: float) -> float:
        if ref == 0.0:
            return 0.0 if new == 0.0 else float("-inf")
        return 100.0 * (1.0 - new / ref)

    return {
        "schema_version": 1,
        "scenario_id": a.scenario_id,
        "modes": [a.mode, b.mode],
        "fuel_savings_pct": savings_pct(a.total_fuel, b.total_fuel),
        "travel_time_savings_pct": savings_pct(a.mean_travel_time, b.mean_travel_time),
        "violation_counts": [a.violation_count, b.violation_count],
        "violation_delta": b.violation_count - a.violation_count,
    }
