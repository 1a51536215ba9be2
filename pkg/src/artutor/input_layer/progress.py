"""Instructional step progression driven by app events and a dwell clock."""
from __future__ import annotations

from typing import Optional, Sequence

from ..protocol import SemanticEvent

DWELL_FACTOR_DEFAULT = 1.5


class ProgressTracker:
    """Tracks the current step of a sequential task chain.

    Completion events advance the chain and emit step_transition; a periodic
    clock tick emits step_dwell_exceeded once per step when the learner
    lingers past the configured multiple of the step's expected duration.
    The step index never decreases except through reset().
    """

    def __init__(self, steps: Sequence, dwell_factor: float = DWELL_FACTOR_DEFAULT, start_ms: int = 0):
        if not steps:
            raise ValueError("step chain is empty")
        self.steps = list(steps)
        self.dwell_factor = dwell_factor
        self._index = 0
        self._entered_ms = start_ms
        self._dwell_emitted: set[str] = set()
        self._finished = False

    @property
    def current_step(self):
        return self.steps[self._index]

    @property
    def current_step_id(self) -> str:
        return self.current_step.step_id

    @property
    def finished(self) -> bool:
        return self._finished

    def on_app_event(self, name: str, step_id: Optional[str], t_ms: int) -> list[SemanticEvent]:
        current = self.current_step
        if name != current.completion_event:
            # Unknown app events are ignored; they carry no progress meaning.
            return []
        if step_id is not None and step_id != current.step_id:
            # A duplicate completion of the step just finished carries no new
            # information and is dropped silently.
            if self._index > 0 and step_id == self.steps[self._index - 1].step_id:
                return []
            return [
                SemanticEvent(
                    event_id=f"out_of_order@{t_ms}",
                    kind="custom",
                    source="progress_analyzer",
                    t_ms=t_ms,
                    confidence=1.0,
                    attributes={
                        "name": "out_of_order_progress",
                        "claimed_step": step_id,
                        "current_step": current.step_id,
                    },
                )
            ]
        if self._finished:
            return []
        events = []
        if self._index + 1 < len(self.steps):
            to_step = self.steps[self._index + 1].step_id
            self._index += 1
            self._entered_ms = t_ms
        else:
            to_step = current.step_id
            self._finished = True
        events.append(
            SemanticEvent(
                event_id=f"step_transition@{t_ms}",
                kind="step_transition",
                source="progress_analyzer",
                t_ms=t_ms,
                confidence=1.0,
                attributes={"from_step": current.step_id, "to_step": to_step},
            )
        )
        return events

    def on_clock(self, t_ms: int) -> list[SemanticEvent]:
        if self._finished:
            return []
        current = self.current_step
        if current.step_id in self._dwell_emitted:
            return []
        dwell_ms = t_ms - self._entered_ms
        limit_ms = self.dwell_factor * current.expected_duration_s * 1000.0
        if dwell_ms <= limit_ms:
            return []
        self._dwell_emitted.add(current.step_id)
        return [
            SemanticEvent(
                event_id=f"dwell@{t_ms}",
                kind="step_dwell_exceeded",
                source="progress_analyzer",
                t_ms=t_ms,
                confidence=1.0,
                attributes={"step_id": current.step_id, "dwell_ms": dwell_ms},
            )
        ]

    def reset(self, t_ms: int = 0) -> None:
        self._index = 0
        self._entered_ms = t_ms
        self._dwell_emitted.clear()
        self._finished = False
