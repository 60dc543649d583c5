"""Independent numerical cross-check: direct transcription of the route problem.

The control is piecewise constant on a fine grid; speeds update exactly and
positions trapezoidally (which is also exact for piecewise-constant control),
so the only gap to the analytical solution is the control discretization and
the reported cost converges at O(1/N^2).  Equality-pinned instances reduce to
one small KKT solve; margin inequalities are handled by active-set iteration
over violated samples.  Nothing here shares code with the analytical solvers.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import LeaderProfile, SafetyParams, leader_eval
from .routes import RoutePlanProblem


class OracleError(RuntimeError):
    """Transcription could not be solved (infeasible pins or stalled active set)."""


@dataclass
class TranscribedProblem:
    """Discretized instance: grid, affine state maps, pins and margin rows."""

    times: np.ndarray                  # n+1 grid points
    h: np.ndarray                      # n step sizes
    p0: float
    v0: float
    pins: list                         # (grid index, "p" | "v", value)
    margin_m0: np.ndarray | None       # margin(u) = m0 - G u, rows = checked grid points
    margin_g: np.ndarray | None

    @property
    def n_steps(self) -> int:
        return len(self.h)

    def state_maps(self):
        """dv/du and dp/du lower-triangular maps for all grid points."""
        n = self.n_steps
        t_cum = np.concatenate([[0.0], np.cumsum(self.h)])
        # v_j = v0 + sum_{l<j} h_l u_l ; p_j adds the trapezoidal carry terms
        sv = np.zeros((n + 1, n))
        sp = np.zeros((n + 1, n))
        for j in range(1, n + 1):
            sv[j, :j] = self.h[:j]
            sp[j, :j] = self.h[:j] * (t_cum[j] - t_cum[1:j + 1]) + 0.5 * self.h[:j]**2
        return sv, sp

    def solve(self, initial_active: tuple[int, ...] = (),
              max_iter: int | None = None) -> tuple[np.ndarray, float]:
        """Active-set QP solve; returns (control samples, cost)."""
        n = self.n_steps
        sv, sp = self.state_maps()
        t_cum = np.concatenate([[0.0], np.cumsum(self.h)])

        rows, rhs = [], []
        for idx, kind, value in self.pins:
            if kind == "p":
                rows.append(sp[idx])
                rhs.append(value - (self.p0 + t_cum[idx] * self.v0))
            else:
                rows.append(sv[idx])
                rhs.append(value - self.v0)
        a_eq = np.array(rows)
        b_eq = np.array(rhs)
        h_inv = 1.0 / self.h

        def kkt(active: np.ndarray):
            if self.margin_g is not None and active.size:
                c = np.vstack([a_eq, self.margin_g[active]])
                d = np.concatenate([b_eq, self.margin_m0[active]])
            else:
                c = a_eq
                d = b_eq
            chc = (c * h_inv) @ c.T
            try:
                lam = np.linalg.solve(chc, d)
            except np.linalg.LinAlgError:
                raise OracleError("singular KKT system; pins are contradictory")
            u = h_inv * (c.T @ lam)
            return u, lam[len(b_eq):]

        active = np.array(sorted(initial_active), dtype=int)
        if max_iter is None:
            max_iter = max(50, n)
        for _ in range(max_iter):
            u, mult = kkt(active)
            if self.margin_g is None:
                break
            # multipliers of the stacked rows equal -mu; mu >= 0 means lam <= 0
            keep = mult <= 1e-9
            margins = self.margin_m0 - self.margin_g @ u
            margins[active] = 0.0
            worst = np.argsort(margins)
            new = [j for j in worst[:8] if margins[j] < -1e-9 and j not in set(active)]
            if keep.all() and not new:
                break
            active = np.unique(np.concatenate([active[keep], np.array(new, dtype=int)]))
        else:
            raise OracleError(f"active set did not settle within {max_iter} iterations")
        cost = 0.5 * float(np.sum(self.h * u**2))
        return u, cost


def _segment_grid(knots: list[float], n_total: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform sub-grids between knots so every pin lands exactly on a grid point."""
    spans = np.diff(np.asarray(knots))
    total = spans.sum()
    counts = np.maximum(2, np.round(n_total * spans / total).astype(int))
    times = [np.array([knots[0]])]
    for i, cnt in enumerate(counts):
        times.append(np.linspace(knots[i], knots[i + 1], cnt + 1)[1:])
    t = np.concatenate(times)
    return t, np.diff(t)


def transcribe(problem: RoutePlanProblem, leader: LeaderProfile | None = None,
               n_steps: int = 1000) -> TranscribedProblem:
    """Build the discretized instance for a route problem."""
    if n_steps < 10:
        raise ValueError(f"need at least 10 steps, got {n_steps}")
    sched = problem.schedule
    knots = list(sched.knot_times())
    times, h = _segment_grid(knots, n_steps)

    pins = []
    for wp in sched.waypoints:
        idx = int(np.argmin(np.abs(times - wp.time)))
        pins.append((idx, "p", wp.position))
        if wp.speed is not None:
            pins.append((idx, "v", wp.speed))
    pins.append((len(times) - 1, "p", sched.terminal_position))

    params: SafetyParams | None = None
    if problem.safety is not None:
        profile, params = problem.safety
        if leader is None:
            leader = profile
    margin_m0 = margin_g = None
    if leader is not None and params is not None:
        sv, sp = TranscribedProblem(times, h, sched.entry_position, sched.entry_speed,
                                    [], None, None).state_maps()
        t_cum = np.concatenate([[0.0], np.cumsum(h)])
        mask = times <= leader.exit_time + 1e-12
        p_k, _ = leader_eval(leader, times[mask])
        m0 = (params.xi * (p_k - (sched.entry_position + t_cum[mask] * sched.entry_speed))
              - params.gamma - params.rho * sched.entry_speed)
        g = params.xi * sp[mask] + params.rho * sv[mask]
        margin_m0, margin_g = m0, g
    return TranscribedProblem(times, h, sched.entry_position, sched.entry_speed,
                              pins, margin_m0, margin_g)


def solve_transcribed(problem: RoutePlanProblem, leader: LeaderProfile | None = None,
                      n_steps: int = 1000,
                      initial_active: tuple[int, ...] = ()) -> tuple[np.ndarray, float]:
    """Transcribe and solve; returns (control samples, cost)."""
    return transcribe(problem, leader, n_steps).solve(initial_active)
