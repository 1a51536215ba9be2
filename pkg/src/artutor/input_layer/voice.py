"""Pre-transcribed utterance ingestion (speech-to-text itself is upstream)."""
from __future__ import annotations

from ..protocol import SemanticEvent

MAX_UTTERANCE_CHARS = 1000


class UtteranceInputError(ValueError):
    """Empty or oversized utterance text."""


def ingest_utterance(text: str, t_ms: int = 0, event_id: str = "") -> SemanticEvent:
    trimmed = text.strip()
    if not trimmed:
        raise UtteranceInputError("utterance text is empty")
    if len(text) > MAX_UTTERANCE_CHARS:
        raise UtteranceInputError(f"utterance exceeds {MAX_UTTERANCE_CHARS} characters")
    return SemanticEvent(
        event_id=event_id or f"utterance@{t_ms}",
        kind="utterance",
        source="voice_analyzer",
        t_ms=t_ms,
        confidence=1.0,
        attributes={"text": trimmed},
    )
