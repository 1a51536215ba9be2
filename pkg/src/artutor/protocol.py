"""Message envelopes, JSON schemas and wire codec.

Every message that crosses a layer boundary or the wire is validated here
against the schema documents shipped under ``schemas/``. Everything in this
module is a pure function over immutable inputs and safe to call from any
thread.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Optional

import jsonschema
from referencing import Registry, Resource

PROTOCOL_VERSION = 1

MESSAGE_KINDS = ("sensor_frame", "adaptation_command", "session_control")

# Attribute keys that would leak raw sensor channels past the input layer.
RAW_CHANNEL_BLACKLIST = frozenset({"gaze_x", "gaze_y", "gaze_z", "rr_ms", "joint_angles"})

_SCHEMA_IDS = (
    "envelope",
    "sensor_frame",
    "semantic_event",
    "adaptation_command",
    "tutor_speech",
    "visualization",
    "instruction_update",
    "session_control",
    "learner_assessment",
    "intervention_plan",
)

COMMAND_TYPES = ("tutor_speech", "visualization", "instruction_update")


class ProtocolError(Exception):
    """Raised when a wire line cannot be decoded into a valid envelope."""

    def __init__(self, message: str, violations: Optional[list["Violation"]] = None):
        super().__init__(message)
        self.violations = violations or []


def _load_schemas() -> dict[str, dict]:
    schemas = {}
    base = resources.files("artutor") / "schemas"
    for schema_id in _SCHEMA_IDS:
        with (base / f"{schema_id}.json").open("r", encoding="utf-8") as fh:
            schemas[schema_id] = json.load(fh)
    return schemas


_SCHEMAS = _load_schemas()
_REGISTRY = Registry().with_resources(
    (schema_id, Resource.from_contents(doc)) for schema_id, doc in _SCHEMAS.items()
)
_VALIDATORS = {
    schema_id: jsonschema.Draft202012Validator(doc, registry=_REGISTRY)
    for schema_id, doc in _SCHEMAS.items()
}


def schema_document(schema_id: str) -> dict:
    """Return the raw schema document (shared with the cockpit)."""
    return _SCHEMAS[schema_id]


@dataclass(frozen=True)
class Violation:
    path: str
    rule: str
    message: str

    def to_dict(self) -> dict:
        return {"path": self.path, "rule": self.rule, "message": self.message}


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[Violation, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def _check(obj: Any, schema_id: str) -> ValidationResult:
    # Dispatch on the command discriminator so violations name the offending
    # field instead of an opaque oneOf mismatch.
    if (
        schema_id == "adaptation_command"
        and isinstance(obj, dict)
        and obj.get("command") in COMMAND_TYPES
    ):
        schema_id = obj["command"]
    validator = _VALIDATORS[schema_id]
    violations = []
    for err in sorted(validator.iter_errors(obj), key=lambda e: (list(map(str, e.absolute_path)), e.message)):
        path = "." + ".".join(str(p) for p in err.absolute_path) if err.absolute_path else "."
        violations.append(Violation(path=path, rule=err.validator, message=err.message))
    if violations:
        return ValidationResult(False, tuple(violations))
    return ValidationResult(True)


def validate_object(obj: Any, schema_id: str) -> ValidationResult:
    """Validate an already-parsed object against a registered schema."""
    if schema_id not in _VALIDATORS:
        raise KeyError(f"unknown schema id: {schema_id}")
    return _check(obj, schema_id)


def validate(raw: str | bytes, expected: str) -> ValidationResult:
    """Validate raw JSON text claimed to be a message of the given kind.

    Total over arbitrary byte strings: returns either ok or a non-empty
    violation list, never raises.
    """
    if expected not in _VALIDATORS:
        raise KeyError(f"unknown message kind: {expected}")
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            return ValidationResult(False, (Violation(".", "parse", f"invalid UTF-8: {exc}"),))
    try:
        obj = json.loads(raw)
    except (json.JSONDecodeError, RecursionError) as exc:
        return ValidationResult(False, (Violation(".", "parse", f"malformed JSON: {exc}"),))
    return _check(obj, expected)


@dataclass(frozen=True)
class Envelope:
    type: str
    session: str
    seq: int
    t_ms: int
    payload: dict
    v: int = PROTOCOL_VERSION

    def to_dict(self) -> dict:
        return {
            "v": self.v,
            "type": self.type,
            "session": self.session,
            "seq": self.seq,
            "t_ms": self.t_ms,
            "payload": self.payload,
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Envelope):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self.v, self.type, self.session, self.seq, self.t_ms))


_PAYLOAD_SCHEMA_BY_TYPE = {
    "sensor_frame": "sensor_frame",
    "adaptation_command": "adaptation_command",
    "session_control": "session_control",
}


def validate_envelope(obj: Any) -> ValidationResult:
    """Validate an envelope object including its type-specific payload."""
    result = _check(obj, "envelope")
    if not result.ok:
        return result
    payload_result = _check(obj["payload"], _PAYLOAD_SCHEMA_BY_TYPE[obj["type"]])
    if payload_result.ok:
        return ValidationResult(True)
    prefixed = tuple(
        Violation(".payload" + (v.path if v.path != "." else ""), v.rule, v.message)
        for v in payload_result.violations
    )
    return ValidationResult(False, prefixed)


def encode(envelope: Envelope) -> str:
    """Encode a schema-valid envelope as one compact, newline-terminated line."""
    obj = envelope.to_dict()
    result = validate_envelope(obj)
    if not result.ok:
        raise ProtocolError("refusing to encode invalid envelope", list(result.violations))
    return json.dumps(obj, separators=(",", ":"), sort_keys=True, ensure_ascii=True) + "\n"


def decode(line: str | bytes) -> Envelope:
    """Decode one wire line into an Envelope, raising ProtocolError on any violation."""
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ProtocolError(f"invalid UTF-8: {exc}") from exc
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed JSON: {exc}") from exc
    if isinstance(obj, dict) and obj.get("v") not in (None, PROTOCOL_VERSION):
        raise ProtocolError(f"unsupported protocol version: {obj.get('v')!r}")
    result = validate_envelope(obj)
    if not result.ok:
        raise ProtocolError("invalid envelope", list(result.violations))
    return Envelope(
        v=obj["v"],
        type=obj["type"],
        session=obj["session"],
        seq=obj["seq"],
        t_ms=obj["t_ms"],
        payload=obj["payload"],
    )


@dataclass
class SemanticEvent:
    """Abstract event emitted by the deterministic analyzers."""

    event_id: str
    kind: str
    source: str
    t_ms: int
    confidence: float
    attributes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "kind": self.kind,
            "source": self.source,
            "t_ms": self.t_ms,
            "confidence": self.confidence,
            "attributes": dict(self.attributes),
        }

    def validate(self) -> ValidationResult:
        return _check(self.to_dict(), "semantic_event")


class SequenceTracker:
    """Rejects duplicate and regressing sequence numbers per (session, sender)."""

    def __init__(self):
        self._last: dict[tuple[str, str], int] = {}

    def accept(self, session: str, sender: str, seq: int) -> bool:
        key = (session, sender)
        last = self._last.get(key)
        if last is not None and seq <= last:
            return False
        self._last[key] = seq
        return True

    def reset(self, session: str) -> None:
        for key in [k for k in self._last if k[0] == session]:
            del self._last[key]
