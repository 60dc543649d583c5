"""Corridor domain types and the small kinematic lookups built on them.

Positions are route-relative: every vehicle enters its route at position 0,
and conflict-zone positions are expressed in that same coordinate.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ConflictZone:
    """One scheduled crossing location (merge, speed-reduction point, roundabout leg, ...)."""

    id: int
    position: float                      # m downstream of the corridor entry
    desired_speed: float | None = None   # m/s pinned when crossing, if posted


@dataclass(frozen=True)
class CorridorSpec:
    """Single-lane corridor: entry at 0, conflict zones at increasing positions."""

    length: float
    zones: tuple[ConflictZone, ...] = ()
    entry_position: float = 0.0


@dataclass(frozen=True)
class VehicleParams:
    """Control and speed envelope of one vehicle."""

    u_min: float = -6.0   # m/s^2, braking limit (negative)
    u_max: float = 3.0    # m/s^2, acceleration limit
    v_min: float = 0.0    # m/s
    v_max: float = 35.0   # m/s


@dataclass(frozen=True)
class SafetyParams:
    """Rear-end gap rule: require xi*(p_leader - p) >= gamma + rho*v at all times."""

    gamma: float = 3.0    # m, standstill distance
    rho: float = 1.2      # s, minimum time gap
    xi: float = 1.0       # headway scaling; 1 leaves the raw gap unscaled


@dataclass(frozen=True)
class VehicleState:
    position: float   # m
    speed: float      # m/s
    time: float       # s


@dataclass(frozen=True)
class Waypoint:
    """Scheduled interior crossing: position pinned at the given time, speed optionally too."""

    time: float
    position: float
    speed: float | None = None


@dataclass(frozen=True)
class ScheduleAssignment:
    """Crossing times handed to one vehicle: entry, interior waypoints, terminal."""

    entry_time: float
    entry_speed: float
    waypoints: tuple[Waypoint, ...]
    terminal_time: float
    terminal_position: float
    entry_position: float = 0.0

    def knot_times(self) -> tuple[float, ...]:
        return (self.entry_time, *(w.time for w in self.waypoints), self.terminal_time)

    def violations(self) -> list[str]:
        out = []
        times = self.knot_times()
        if any(b <= a for a, b in zip(times, times[1:])):
            out.append("schedule times not strictly increasing")
        positions = (self.entry_position, *(w.position for w in self.waypoints),
                     self.terminal_position)
        if any(b <= a for a, b in zip(positions, positions[1:])):
            out.append("schedule positions not strictly increasing")
        return out


@dataclass(frozen=True)
class LeaderSegment:
    """Constant-acceleration span of a leader, anchored at its start instant."""

    start_time: float
    position: float
    speed: float
    accel: float = 0.0


@dataclass(frozen=True)
class LeaderProfile:
    """Piecewise constant-acceleration motion of the vehicle ahead, valid until exit_time."""

    segments: tuple[LeaderSegment, ...]
    exit_time: float
    starts: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "starts", tuple(s.start_time for s in self.segments))
        object.__setattr__(self, "_arrays", (
            np.array(self.starts),
            np.array([s.position for s in self.segments]),
            np.array([s.speed for s in self.segments]),
            np.array([s.accel for s in self.segments]),
        ))

    @property
    def start_time(self) -> float:
        return self.segments[0].start_time

    def segment_index(self, t: float) -> int:
        return max(0, bisect.bisect_right(self.starts, t) - 1)

    @classmethod
    def constant_speed(cls, position: float, speed: float, start_time: float = 0.0,
                       exit_time: float | None = None) -> "LeaderProfile":
        if exit_time is None:
            exit_time = start_time + 1e9
        seg = LeaderSegment(start_time, position, speed, 0.0)
        return cls((seg,), exit_time)

    @classmethod
    def from_accel_spans(cls, start_time: float, position: float, speed: float,
                         spans: list[tuple[float, float]],
                         exit_time: float | None = None) -> "LeaderProfile":
        """Build contiguous segments from (duration, accel) spans; continuity by construction."""
        segs = []
        t, p, v = start_time, position, speed
        for duration, accel in spans:
            segs.append(LeaderSegment(t, p, v, accel))
            p += v * duration + 0.5 * accel * duration**2
            v += accel * duration
            t += duration
        if exit_time is None:
            exit_time = t
        return cls(tuple(segs), exit_time)

    def violations(self) -> list[str]:
        out = []
        if not self.segments:
            return ["leader profile has no segments"]
        for a, b in zip(self.segments, self.segments[1:]):
            if b.start_time <= a.start_time:
                out.append("leader segments not ordered in time")
            dt = b.start_time - a.start_time
            p_end = a.position + a.speed * dt + 0.5 * a.accel * dt**2
            v_end = a.speed + a.accel * dt
            if abs(p_end - b.position) > 1e-9 or abs(v_end - b.speed) > 1e-9:
                out.append(f"leader profile discontinuous at t={b.start_time:g}")
        if self.exit_time < self.segments[-1].start_time:
            out.append("leader exit_time precedes the last segment start")
        return out


def leader_state_at(profile: LeaderProfile, t: float) -> VehicleState:
    """Evaluate the leader's exact constant-acceleration kinematics at time t.

    Raises ValueError outside [profile start, exit_time]; after the exit the
    leader is gone and the query has no answer.
    """
    if t < profile.start_time - 1e-12 or t > profile.exit_time + 1e-12:
        raise ValueError(f"time {t:g} outside leader profile span "
                         f"[{profile.start_time:g}, {profile.exit_time:g}]")
    seg = profile.segments[profile.segment_index(t)]
    dt = t - seg.start_time
    return VehicleState(position=seg.position + seg.speed * dt + 0.5 * seg.accel * dt**2,
                        speed=seg.speed + seg.accel * dt,
                        time=t)


def leader_eval(profile: LeaderProfile, times: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized leader (position, speed) without span checks; callers mask exits."""
    starts, p0s, v0s, accels = profile._arrays
    idx = np.clip(np.searchsorted(starts, times, side="right") - 1, 0, len(starts) - 1)
    p0, v0, a = p0s[idx], v0s[idx], accels[idx]
    dt = times - starts[idx]
    return p0 + v0 * dt + 0.5 * a * dt**2, v0 + a * dt


def min_safe_distance(params: SafetyParams, v: float) -> float:
    """Speed-dependent minimum gap gamma + rho*v."""
    if v < 0:
        raise ValueError(f"speed must be nonnegative, got {v:g}")
    return params.gamma + params.rho * v
