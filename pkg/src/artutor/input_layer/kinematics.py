"""Joint-state telemetry: finite-difference velocity and acceleration."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from ..protocol import SemanticEvent

JOINT_COUNT = 6


class KinematicsInputError(ValueError):
    """Duplicate or non-increasing joint-sample timestamps."""


@dataclass(frozen=True)
class JointSample:
    t_ms: int
    angles_rad: tuple[float, ...]


@dataclass(frozen=True)
class KinematicSample:
    t_ms: int
    velocity_rad_s: tuple[float, ...]
    acceleration_rad_s2: tuple[float, ...]


def _differences(times_s: Sequence[float], values: Sequence[Sequence[float]]) -> list[tuple[float, ...]]:
    """Central differences at interior points, one-sided at the boundaries."""
    n = len(times_s)
    out = []
    for i in range(n):
        if i == 0:
            lo, hi = 0, 1
        elif i == n - 1:
            lo, hi = n - 2, n - 1
        else:
            lo, hi = i - 1, i + 1
        dt = times_s[hi] - times_s[lo]
        out.append(tuple((values[hi][j] - values[lo][j]) / dt for j in range(JOINT_COUNT)))
    return out


def derive_kinematics(joints: Sequence[JointSample]) -> list[KinematicSample]:
    """Velocity and acceleration per joint; empty list when under 3 samples."""
    if len(joints) < 3:
        return []
    for i in range(1, len(joints)):
        if joints[i].t_ms <= joints[i - 1].t_ms:
            raise KinematicsInputError(
                f"joint samples must have strictly increasing timestamps (index {i})"
            )
    times_s = [s.t_ms / 1000.0 for s in joints]
    angles = [s.angles_rad for s in joints]
    velocities = _differences(times_s, angles)
    accelerations = _differences(times_s, velocities)
    return [
        KinematicSample(t_ms=joints[i].t_ms, velocity_rad_s=velocities[i], acceleration_rad_s2=accelerations[i])
        for i in range(len(joints))
    ]


class RobotDataAnalyzer:
    """Streaming joint-state analyzer emitting velocity/idle semantic events."""

    def __init__(
        self,
        high_velocity_rad_s: float = 1.5,
        idle_velocity_rad_s: float = 0.01,
        idle_after_ms: int = 10_000,
        window: int = 64,
    ):
        self.high_velocity_rad_s = high_velocity_rad_s
        self.idle_velocity_rad_s = idle_velocity_rad_s
        self.idle_after_ms = idle_after_ms
        self.window = window
        self._samples: list[JointSample] = []
        self._moving_since: Optional[int] = None
        self._idle_since: Optional[int] = None
        self._idle_emitted = False
        self._fast = False

    def push(self, sample: JointSample) -> list[SemanticEvent]:
        if self._samples and sample.t_ms <= self._samples[-1].t_ms:
            return []
        self._samples.append(sample)
        if len(self._samples) > self.window:
            self._samples = self._samples[-self.window:]
        if len(self._samples) < 3:
            return []

        latest = derive_kinematics(self._samples[-3:])[-2]
        peak = max(abs(v) for v in latest.velocity_rad_s)
        events: list[SemanticEvent] = []

        if peak > self.high_velocity_rad_s and not self._fast:
            self._fast = True
            events.append(
                SemanticEvent(
                    event_id=f"high_vel@{latest.t_ms}",
                    kind="high_joint_velocity",
                    source="robot_data_analyzer",
                    t_ms=latest.t_ms,
                    confidence=1.0,
                    attributes={"max_velocity_rad_s": round(peak, 4)},
                )
            )
        elif peak <= self.high_velocity_rad_s:
            self._fast = False

        if peak < self.idle_velocity_rad_s:
            if self._idle_since is None:
                self._idle_since = latest.t_ms
            idle_ms = latest.t_ms - self._idle_since
            if idle_ms >= self.idle_after_ms and not self._idle_emitted:
                self._idle_emitted = True
                events.append(
                    SemanticEvent(
                        event_id=f"robot_idle@{latest.t_ms}",
                        kind="robot_idle",
                        source="robot_data_analyzer",
                        t_ms=latest.t_ms,
                        confidence=1.0,
                        attributes={"idle_ms": idle_ms},
                    )
                )
        else:
            self._idle_since = None
            self._idle_emitted = False
        return events

    def reset(self) -> None:
        self._samples = []
        self._moving_since = None
        self._idle_since = None
        self._idle_emitted = False
        self._fast = False
