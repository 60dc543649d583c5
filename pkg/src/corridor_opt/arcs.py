"""Closed-form minimum-effort arcs.

On any interval where no inequality is active, the control that minimizes
(1/2) * integral(u^2) subject to p' = v, v' = u is affine in time:

    u(t) = alpha*t + c
    v(t) = alpha*t^2/2 + c*t + d
    p(t) = alpha*t^3/6 + c*t^2/2 + d*t + e

Four scalar boundary conditions pin (alpha, c, d, e) through a 4x4 linear
system; everything in this module is a way of writing those four rows.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SolverError(RuntimeError):
    """A boundary-condition system is singular or numerically unusable."""


@dataclass(frozen=True)
class PolynomialArc:
    """One unconstrained arc; coefficients are in absolute time."""

    t_start: float
    t_end: float
    alpha: float   # m/s^3, slope of the control
    c: float       # m/s^2
    d: float       # m/s
    e: float       # m

    def __post_init__(self):
        if not self.t_start < self.t_end:
            raise SolverError(f"degenerate arc interval [{self.t_start:g}, {self.t_end:g}]")

    def control(self, t):
        return self.alpha * t + self.c

    def speed(self, t):
        return (0.5 * self.alpha * t + self.c) * t + self.d

    def position(self, t):
        return ((self.alpha * t / 6.0 + 0.5 * self.c) * t + self.d) * t + self.e

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


# Basis rows for one condition on (alpha, c, d, e): value of p, v or u at time t.
def _row(kind: str, t: float) -> np.ndarray:
    if kind == "p":
        return np.array([t**3 / 6.0, t**2 / 2.0, t, 1.0])
    if kind == "v":
        return np.array([t**2 / 2.0, t, 1.0, 0.0])
    if kind == "u":
        return np.array([t, 1.0, 0.0, 0.0])
    raise ValueError(f"unknown condition kind {kind!r}")


def solve_conditions(t_start: float, t_end: float,
                     conditions: list[tuple[str, float, float]]) -> PolynomialArc:
    """Solve for the arc satisfying four (kind, time, value) conditions."""
    if len(conditions) != 4:
        raise ValueError(f"an arc needs exactly 4 conditions, got {len(conditions)}")
    if not t_end > t_start:
        raise SolverError(f"degenerate arc interval [{t_start:g}, {t_end:g}]")
    a = np.vstack([_row(kind, t) for kind, t, _ in conditions])
    b = np.array([value for _, _, value in conditions])
    try:
        coefs = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as err:
        raise SolverError(f"singular boundary-condition system: {err}") from None
    residual = np.abs(a @ coefs - b).max()
    if not np.isfinite(coefs).all() or residual > 1e-7:
        raise SolverError(f"ill-conditioned boundary-condition system (residual {residual:.2e})")
    return PolynomialArc(t_start, t_end, *coefs)


@dataclass(frozen=True)
class BoundarySpec:
    """Initial state plus one of three terminal closures.

    kind "free_speed":              position pinned at t_f, u(t_f) = 0 (free
                                    terminal speed makes the control vanish).
    kind "pinned_speed":            position and speed pinned at t_f.
    kind "pinned_speed_and_control": speed and control pinned at t_f, position
                                    free (p_f must be omitted).
    """

    t0: float
    p0: float
    v0: float
    t_f: float
    p_f: float | None = None
    kind: str = "free_speed"
    v_f: float | None = None
    u_f: float | None = None

    def terminal_conditions(self) -> list[tuple[str, float, float]]:
        if self.kind == "free_speed":
            if self.p_f is None:
                raise ValueError("free_speed terminal requires p_f")
            if self.v_f is not None or self.u_f is not None:
                raise ValueError("free_speed terminal takes no v_f/u_f pins")
            return [("p", self.t_f, self.p_f), ("u", self.t_f, 0.0)]
        if self.kind == "pinned_speed":
            if self.p_f is None or self.v_f is None:
                raise ValueError("pinned_speed terminal requires p_f and v_f")
            if self.u_f is not None:
                raise ValueError("pinned_speed terminal with u_f is over-determined")
            return [("p", self.t_f, self.p_f), ("v", self.t_f, self.v_f)]
        if self.kind == "pinned_speed_and_control":
            if self.v_f is None or self.u_f is None:
                raise ValueError("pinned_speed_and_control requires v_f and u_f")
            if self.p_f is not None:
                raise ValueError("pinned_speed_and_control with p_f is over-determined")
            return [("v", self.t_f, self.v_f), ("u", self.t_f, self.u_f)]
        raise ValueError(f"unknown terminal kind {self.kind!r}")


def _solve_boundary(bc: BoundarySpec) -> PolynomialArc:
    conditions = [("p", bc.t0, bc.p0), ("v", bc.t0, bc.v0)] + bc.terminal_conditions()
    return solve_conditions(bc.t0, bc.t_f, conditions)


def solve_free_arc(bc: BoundarySpec) -> PolynomialArc:
    """Arc with fixed initial state, pinned terminal position and vanishing terminal control."""
    if bc.kind != "free_speed":
        raise ValueError(f"solve_free_arc needs a free_speed boundary, got {bc.kind!r}")
    return _solve_boundary(bc)


def solve_pinned_arc(bc: BoundarySpec) -> PolynomialArc:
    """Arc with fixed initial state and a pinned terminal speed (and/or control)."""
    if bc.kind not in ("pinned_speed", "pinned_speed_and_control"):
        raise ValueError(f"solve_pinned_arc needs a pinned terminal, got {bc.kind!r}")
    return _solve_boundary(bc)


def eval_arc(arc: PolynomialArc, t: float) -> tuple[float, float, float]:
    """(u, v, p) at time t; t must lie inside the arc's interval."""
    if t < arc.t_start - 1e-9 or t > arc.t_end + 1e-9:
        raise ValueError(f"time {t:g} outside arc interval [{arc.t_start:g}, {arc.t_end:g}]")
    return arc.control(t), arc.speed(t), arc.position(t)


def arc_cost(arc: PolynomialArc) -> float:
    """Closed-form (1/2) * integral of (alpha*t + c)^2 over the arc."""
    t1, t2 = arc.t_start, arc.t_end
    alpha, c = arc.alpha, arc.c
    return 0.5 * (alpha**2 * (t2**3 - t1**3) / 3.0
                  + alpha * c * (t2**2 - t1**2)
                  + c**2 * (t2 - t1))
