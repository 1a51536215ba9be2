#!/usr/bin/env python3
"""Regenerate the bundled sensor traces under traces/.

Each trace is a JSONL file of sensor_frame envelopes with virtual-clock
timestamps; replaying them with the scripted provider is deterministic.
"""
from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from artutor.protocol import Envelope, encode  # noqa: E402

GRIPPER = (0.45, 0.10, 0.35)
AWAY = (1.45, 1.10, 1.35)

RR_CALM = [780.0, 820.0]       # rmssd 40 ms
RR_SUPPRESSED = [796.0, 804.0]  # rmssd 8 ms, an 80% drop in variability


class TraceBuilder:
    def __init__(self, session: str):
        self.session = session
        self.seq = 0
        self.lines: list[str] = []

    def frame(self, t_ms: int, **payload_fields):
        self.seq += 1
        payload = {"t_ms": t_ms, **payload_fields}
        env = Envelope(type="sensor_frame", session=self.session, seq=self.seq, t_ms=t_ms, payload=payload)
        self.lines.append(encode(env))

    def write(self, name: str):
        path = ROOT / "traces" / name
        path.write_text("".join(self.lines), encoding="utf-8")
        print(f"wrote {path} ({len(self.lines)} frames)")


def gaze_burst(t_ms: int, point, n: int = 10, spacing_ms: int = 100):
    return [
        {"t_ms": t_ms - (n - 1 - i) * spacing_ms, "point_m": list(point)}
        for i in range(n)
    ]


def add_second(tb: TraceBuilder, t_s: int, rr=None, gaze_on=None, utterance=None, app_event=None):
    fields = {}
    if rr is not None:
        fields["rr"] = list(rr)
    if gaze_on is not None:
        fields["gaze"] = gaze_burst(t_s * 1000, gaze_on)
    if utterance is not None:
        fields["utterance"] = utterance
    if app_event is not None:
        fields["app_event"] = app_event
    tb.frame(t_s * 1000, **fields)


def gaze_cycle_point(t_s: int):
    # 3 s of fixation on the gripper, then 1 s saccade to settle it.
    return GRIPPER if t_s % 4 != 0 else AWAY


def frustration_common(tb: TraceBuilder, second_burst: bool):
    completions = {15: "s1", 30: "s2", 45: "s3"}
    for t_s in range(1, 61):
        app_event = None
        if t_s in completions:
            app_event = {"name": "step_completed", "step_id": completions[t_s]}
        gaze = gaze_cycle_point(t_s) if 46 <= t_s <= 58 else None
        add_second(tb, t_s, rr=RR_CALM, gaze_on=gaze, app_event=app_event)
    for t_s in range(61, 111):
        utterance = None
        if t_s == 88:
            utterance = "I don't get this"
        if second_burst and t_s == 93:
            utterance = "This is hopeless, I give up"
        add_second(tb, t_s, rr=RR_SUPPRESSED, utterance=utterance)


def make_frustration():
    tb = TraceBuilder("frustration-s4")
    frustration_common(tb, second_burst=False)
    tb.write("frustration_s4.jsonl")


def make_double_frustration():
    tb = TraceBuilder("double-frustration")
    frustration_common(tb, second_burst=True)
    tb.write("double_frustration.jsonl")


def make_calm():
    tb = TraceBuilder("calm-5min")
    completions = {60: "s1", 120: "s2", 180: "s3"}
    for t_s in range(1, 301):
        app_event = None
        if t_s in completions:
            app_event = {"name": "step_completed", "step_id": completions[t_s]}
        add_second(tb, t_s, rr=RR_CALM, gaze_on=gaze_cycle_point(t_s), app_event=app_event)
    tb.write("calm_5min.jsonl")


def make_confusion():
    tb = TraceBuilder("confusion-tcp")
    add_second(tb, 5, app_event={"name": "step_completed", "step_id": "s1"})
    add_second(tb, 10, app_event={"name": "step_completed", "step_id": "s2"})
    for t_s in range(11, 20):
        add_second(tb, t_s)
    add_second(tb, 20, utterance="Which way is the X axis from here?")
    for t_s in range(21, 26):
        add_second(tb, t_s)
    tb.write("confusion_tcp.jsonl")


def make_overload():
    tb = TraceBuilder("overload-s3")
    add_second(tb, 5, app_event={"name": "step_completed", "step_id": "s1"})
    add_second(tb, 10, app_event={"name": "step_completed", "step_id": "s2"})
    for t_s in range(11, 20):
        add_second(tb, t_s)
    add_second(tb, 20, utterance="This is too complicated, there are so many settings")
    for t_s in range(21, 26):
        add_second(tb, t_s)
    tb.write("overload_s3.jsonl")


if __name__ == "__main__":
    make_frustration()
    make_double_frustration()
    make_calm()
    make_confusion()
    make_overload()
