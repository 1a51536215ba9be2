from __future__ import annotations

import pytest

from artutor.input_layer.progress import ProgressTracker
from artutor.input_layer.voice import UtteranceInputError, ingest_utterance


@pytest.fixture
def tracker(kb):
    return ProgressTracker(kb.steps)


class TestProgress:
    def test_completion_advances_and_emits_transition(self, tracker):
        events = tracker.on_app_event("step_completed", "s1", 10_000)
        assert len(events) == 1
        assert events[0].kind == "step_transition"
        assert events[0].attributes == {"from_step": "s1", "to_step": "s2"}
        assert tracker.current_step_id == "s2"

    def test_dwell_exceeded_fires_exactly_once(self, tracker):
        # s1 expects 90 s; the 1.5x threshold is 135 s.
        limit_ms = int(1.5 * 90 * 1000)
        assert tracker.on_clock(limit_ms) == []
        events = tracker.on_clock(limit_ms + 1)
        assert len(events) == 1
        assert events[0].kind == "step_dwell_exceeded"
        assert events[0].attributes["step_id"] == "s1"
        assert tracker.on_clock(limit_ms + 60_000) == []

    def test_out_of_order_completion_keeps_state(self, tracker):
        tracker.on_app_event("step_completed", "s1", 1000)
        events = tracker.on_app_event("step_completed", "s6", 2000)
        assert len(events) == 1
        assert events[0].kind == "custom"
        assert events[0].attributes["name"] == "out_of_order_progress"
        assert tracker.current_step_id == "s2"

    def test_duplicate_completion_of_previous_step_ignored(self, tracker):
        tracker.on_app_event("step_completed", "s1", 1000)
        assert tracker.on_app_event("step_completed", "s1", 2000) == []
        assert tracker.current_step_id == "s2"

    def test_step_index_monotone_until_reset(self, tracker):
        seen = []
        for sid in ["s1", "s2", "s3"]:
            tracker.on_app_event("step_completed", sid, 1000)
            seen.append(tracker.current_step_id)
        assert seen == ["s2", "s3", "s4"]
        tracker.reset(5000)
        assert tracker.current_step_id == "s1"

    def test_chain_completes(self, tracker):
        for sid in [s.step_id for s in tracker.steps]:
            tracker.on_app_event("step_completed", sid, 1000)
        assert tracker.finished

    def test_events_pass_schema(self, tracker):
        for ev in tracker.on_app_event("step_completed", "s1", 1000):
            assert ev.validate().ok


class TestIngestUtterance:
    def test_plain_text(self):
        event = ingest_utterance("I don't get this", t_ms=500)
        assert event.kind == "utterance"
        assert event.attributes["text"] == "I don't get this"
        assert event.validate().ok

    def test_whitespace_trimmed(self):
        assert ingest_utterance("  ok  ").attributes["text"] == "ok"

    def test_empty_rejected(self):
        with pytest.raises(UtteranceInputError):
            ingest_utterance("")
        with pytest.raises(UtteranceInputError):
            ingest_utterance("   ")

    def test_oversized_rejected(self):
        with pytest.raises(UtteranceInputError):
            ingest_utterance("x" * 1001)
