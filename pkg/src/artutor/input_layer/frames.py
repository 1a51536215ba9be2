"""Sensor frame envelope payload parsing and sanitation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..protocol import ValidationResult, validate_object
from .gaze import GazeSample
from .kinematics import JointSample


class FrameInputError(ValueError):
    """Frame payload fails the sensor_frame schema."""

    def __init__(self, result: ValidationResult):
        super().__init__("; ".join(f"{v.path}: {v.message}" for v in result.violations))
        self.violations = result.violations


@dataclass
class AppEvent:
    name: str
    step_id: Optional[str] = None


@dataclass
class SensorFrame:
    t_ms: int
    gaze: list[GazeSample] = field(default_factory=list)
    joints: Optional[JointSample] = None
    rr: list[float] = field(default_factory=list)
    utterance: Optional[str] = None
    app_event: Optional[AppEvent] = None


def parse_frame(payload: dict) -> SensorFrame:
    """Validate and convert a sensor_frame payload into a SensorFrame.

    Per-sample timestamps are clamped to [t_ms - 1000, t_ms]; samples outside
    that band are dropped, mirroring the discard-and-count policy used for
    out-of-range RR intervals downstream.
    """
    result = validate_object(payload, "sensor_frame")
    if not result.ok:
        raise FrameInputError(result)
    t_ms = payload["t_ms"]
    frame = SensorFrame(t_ms=t_ms)
    for g in payload.get("gaze", []):
        if t_ms - 1000 <= g["t_ms"] <= t_ms:
            frame.gaze.append(GazeSample(t_ms=g["t_ms"], point_m=tuple(g["point_m"])))
    j = payload.get("joints")
    if j is not None and t_ms - 1000 <= j["t_ms"] <= t_ms:
        frame.joints = JointSample(t_ms=j["t_ms"], angles_rad=tuple(j["angles_rad"]))
    frame.rr = list(payload.get("rr", []))
    frame.utterance = payload.get("utterance")
    ae = payload.get("app_event")
    if ae is not None:
        frame.app_event = AppEvent(name=ae["name"], step_id=ae.get("step_id"))
    return frame
