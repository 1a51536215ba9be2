"""Reasoning core: situation assessment and pedagogical decision-making.

Two agents, deliberately decoupled: the assessment agent condenses the
recent semantic-event window into a learner state, the teacher agent turns
a revised state plus knowledge-base rules into an intervention plan.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .knowledge_base import KnowledgeBase
from .llm_gateway import AgentProfile, CompletionRequest, Gateway, GatewayError, Message
from .output_layer import enforce_schema
from .protocol import SemanticEvent, Violation


@dataclass(frozen=True)
class LearnerAssessment:
    affect: str
    load: str
    step_id: str
    summary: str
    evidence: tuple[str, ...]
    revised: bool
    t_ms: int

    def to_dict(self) -> dict:
        return {
            "affect": self.affect,
            "load": self.load,
            "step_id": self.step_id,
            "summary": self.summary,
            "evidence": list(self.evidence),
            "revised": self.revised,
            "t_ms": self.t_ms,
        }


@dataclass(frozen=True)
class ContextWindow:
    horizon_ms: int
    now_ms: int
    events: tuple[SemanticEvent, ...]
    last_assessment: Optional[LearnerAssessment] = None

    def __post_init__(self):
        cutoff = self.now_ms - self.horizon_ms
        for i, ev in enumerate(self.events):
            if ev.t_ms < cutoff:
                raise ValueError(f"event {ev.event_id} older than the context horizon")
            if i and ev.t_ms < self.events[i - 1].t_ms:
                raise ValueError("context window events out of time order")

    def serialize_events(self) -> str:
        return "\n".join(
            json.dumps(ev.to_dict(), sort_keys=True, separators=(",", ":")) for ev in self.events
        )


@dataclass(frozen=True)
class AssessOutcome:
    assessment: LearnerAssessment
    revised: bool
    skipped: bool = False


def _render(template: str, fields: dict[str, str]) -> str:
    text = template
    for key, value in fields.items():
        text = text.replace("{{" + key + "}}", value)
    return text


def _default_assessment(step_id: str, t_ms: int) -> LearnerAssessment:
    return LearnerAssessment(
        affect="calm",
        load="low",
        step_id=step_id,
        summary="Session start: no observations yet.",
        evidence=(),
        revised=True,
        t_ms=t_ms,
    )


def assess(
    window: ContextWindow,
    profile: AgentProfile,
    gateway: Gateway,
    template: str,
    current_step_id: str,
    repair_budget: int = 2,
) -> AssessOutcome:
    """Synthesize the learner's state from the context window.

    A cold start (no events, no prior assessment) yields the default calm
    state without touching the gateway. When the parsed affect and load match
    the previous assessment, the previous object itself is retained and the
    cycle is marked unrevised.
    """
    previous = window.last_assessment
    if not window.events and previous is None:
        return AssessOutcome(_default_assessment(current_step_id, window.now_ms), revised=True)

    fields = {
        "events": window.serialize_events(),
        "last_assessment": json.dumps(previous.to_dict(), sort_keys=True) if previous else "none",
        "step_id": current_step_id,
    }
    user_text = _render(template, fields)
    messages = (Message("system", profile.system_prompt), Message("user", user_text))

    def reprompt(violations: list[Violation]) -> str:
        repair_text = (
            "Your previous reply violated the required schema:\n"
            + "\n".join(f"- {v.path}: {v.message}" for v in violations)
            + "\nReply again with a single corrected JSON object."
        )
        return gateway.complete(CompletionRequest(profile, messages + (Message("user", repair_text),))).text

    try:
        first = gateway.complete(CompletionRequest(profile, messages)).text
    except GatewayError:
        fallback = previous if previous is not None else _default_assessment(current_step_id, window.now_ms)
        return AssessOutcome(fallback, revised=False, skipped=True)

    outcome = enforce_schema(first, "learner_assessment", reprompt=reprompt, repair_budget=repair_budget)
    if not outcome.ok:
        fallback = previous if previous is not None else _default_assessment(current_step_id, window.now_ms)
        return AssessOutcome(fallback, revised=False, skipped=True)

    parsed = outcome.value
    if previous is not None and parsed["affect"] == previous.affect and parsed["load"] == previous.load:
        return AssessOutcome(previous, revised=False)

    window_ids = {ev.event_id for ev in window.events}
    evidence = tuple(e for e in parsed.get("evidence", []) if e in window_ids)
    return AssessOutcome(
        LearnerAssessment(
            affect=parsed["affect"],
            load=parsed["load"],
            step_id=parsed.get("step_id") or current_step_id,
            summary=parsed["summary"],
            evidence=evidence,
            revised=True,
            t_ms=window.now_ms,
        ),
        revised=True,
    )


@dataclass(frozen=True)
class InterventionPlan:
    decision: str
    target: Optional[str] = None
    directive: Optional[str] = None
    rationale: str = ""
    priority: int = 0

    def to_dict(self) -> dict:
        d = {"decision": self.decision, "rationale": self.rationale, "priority": self.priority}
        if self.decision == "intervene":
            d["target"] = self.target
            d["directive"] = self.directive
        return d


NO_INTERVENTION = InterventionPlan(decision="none", rationale="no intervention needed")

TARGET_COMMAND_TYPE = {
    "tutor": "tutor_speech",
    "visualization": "visualization",
    "instruction": "instruction_update",
}


def decide(
    assessment: LearnerAssessment,
    kb: KnowledgeBase,
    profile: AgentProfile,
    gateway: Gateway,
    template: str,
    cooled_down: Sequence[str] = (),
    repair_budget: int = 2,
) -> InterventionPlan:
    """Decide whether and how to intervene; requires a revised assessment.

    Plans targeting a command type currently under cooldown are downgraded
    to no intervention.
    """
    rules = kb.match_rules(assessment.affect, assessment.load, assessment.step_id)
    try:
        step = kb.step(assessment.step_id)
        step_text = f"{step.step_id} ({step.topic}): {step.title}. {step.instruction_text['standard']}"
    except KeyError:
        step_text = assessment.step_id
    fields = {
        "assessment": json.dumps(assessment.to_dict(), sort_keys=True),
        "rules": "\n".join(
            f"- {r.rule_id} (priority {r.priority}): {r.recommended_intervention}" for r in rules
        )
        or "none",
        "step": step_text,
    }
    user_text = _render(template, fields)
    messages = (Message("system", profile.system_prompt), Message("user", user_text))

    def reprompt(violations: list[Violation]) -> str:
        repair_text = (
            "Your previous reply violated the required schema:\n"
            + "\n".join(f"- {v.path}: {v.message}" for v in violations)
            + "\nReply again with a single corrected JSON object."
        )
        return gateway.complete(CompletionRequest(profile, messages + (Message("user", repair_text),))).text

    try:
        first = gateway.complete(CompletionRequest(profile, messages)).text
    except GatewayError:
        return NO_INTERVENTION

    outcome = enforce_schema(first, "intervention_plan", reprompt=reprompt, repair_budget=repair_budget)
    if not outcome.ok:
        return NO_INTERVENTION

    parsed = outcome.value
    if parsed["decision"] == "none":
        return InterventionPlan(
            decision="none",
            rationale=parsed.get("rationale", ""),
            priority=parsed.get("priority", 0),
        )
    if TARGET_COMMAND_TYPE[parsed["target"]] in cooled_down:
        return InterventionPlan(decision="none", rationale="cooldown", priority=parsed.get("priority", 0))
    return InterventionPlan(
        decision="intervene",
        target=parsed["target"],
        directive=parsed["directive"],
        rationale=parsed.get("rationale", ""),
        priority=parsed.get("priority", 0),
    )
