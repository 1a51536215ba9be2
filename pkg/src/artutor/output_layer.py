"""Low-temperature output agents and the validation/repair loop.

Every raw gateway reply passes through enforce_schema before it can become
an AdaptationCommand; after the repair budget is exhausted the caller
substitutes the role's static fallback (tutor: a neutral offer of help,
visualization/instruction: no command at all).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

from .knowledge_base import KnowledgeBase, TaskStep
from .llm_gateway import AgentProfile, CompletionRequest, Gateway, GatewayError, Message
from .protocol import ValidationResult, Violation, validate

TUTOR_FALLBACK = {
    "command": "tutor_speech",
    "text": "Let me know if you need help.",
    "tone": "neutral",
}


@dataclass(frozen=True)
class EnforcementFailure:
    schema_id: str
    attempts: int
    violations: tuple[Violation, ...]


@dataclass(frozen=True)
class EnforcementOutcome:
    value: Optional[dict]
    failure: Optional[EnforcementFailure]
    attempts: int
    repairs: int

    @property
    def ok(self) -> bool:
        return self.value is not None


def enforce_schema(
    raw: str,
    schema_id: str,
    reprompt: Optional[Callable[[list[Violation]], str]] = None,
    semantic_check: Optional[Callable[[dict], list[Violation]]] = None,
    repair_budget: int = 2,
) -> EnforcementOutcome:
    """Validate a reply, re-prompting with the violation list on failure.

    ``repair_budget`` caps total validation attempts (the initial reply plus
    repairs). ``semantic_check`` adds context-dependent rules (asset catalog
    membership, current-step binding) on top of the JSON schema.
    """
    text = raw
    attempts = 0
    violations: list[Violation] = []
    while attempts < repair_budget:
        attempts += 1
        result: ValidationResult = validate(text, schema_id)
        violations = list(result.violations)
        if result.ok and semantic_check is not None:
            violations = semantic_check(json.loads(text))
        if not violations:
            return EnforcementOutcome(
                value=json.loads(text), failure=None, attempts=attempts, repairs=attempts - 1
            )
        if reprompt is None or attempts >= repair_budget:
            break
        try:
            text = reprompt(violations)
        except GatewayError:
            break
    return EnforcementOutcome(
        value=None,
        failure=EnforcementFailure(schema_id=schema_id, attempts=attempts, violations=tuple(violations)),
        attempts=attempts,
        repairs=attempts - 1,
    )


def _render(template: str, fields: dict[str, str]) -> str:
    text = template
    for key, value in fields.items():
        text = text.replace("{{" + key + "}}", value)
    return text


def _violation_text(violations: list[Violation]) -> str:
    return "\n".join(f"- {v.path}: {v.message} ({v.rule})" for v in violations)


class OutputAgent:
    """Shared completion + enforcement flow for the three output roles."""

    def __init__(self, gateway: Gateway, profile: AgentProfile, template: str, repair_budget: int = 2):
        self.gateway = gateway
        self.profile = profile
        self.template = template
        self.repair_budget = repair_budget
        self.last_outcome: Optional[EnforcementOutcome] = None

    def _run(
        self,
        fields: dict[str, str],
        schema_id: str,
        semantic_check: Optional[Callable[[dict], list[Violation]]] = None,
        repair_extra: str = "",
    ) -> Optional[dict]:
        user_text = _render(self.template, fields)
        messages = [Message("system", self.profile.system_prompt), Message("user", user_text)]

        def reprompt(violations: list[Violation]) -> str:
            repair_text = (
                "Your previous reply violated the required schema:\n"
                + _violation_text(violations)
                + ("\n" + repair_extra if repair_extra else "")
                + "\nReply again with a single corrected JSON object."
            )
            repair_messages = tuple(messages) + (Message("user", repair_text),)
            return self.gateway.complete(CompletionRequest(self.profile, repair_messages)).text

        try:
            first = self.gateway.complete(CompletionRequest(self.profile, tuple(messages))).text
        except GatewayError:
            self.last_outcome = None
            return None
        outcome = enforce_schema(
            first,
            schema_id,
            reprompt=reprompt,
            semantic_check=semantic_check,
            repair_budget=self.repair_budget,
        )
        self.last_outcome = outcome
        return outcome.value


def generate_tutor(agent: OutputAgent, plan: dict, assessment: dict) -> dict:
    """Tutor speech for an intervention plan; falls back to a neutral offer."""
    value = agent._run(
        {
            "directive": plan.get("directive", ""),
            "assessment": json.dumps(assessment, sort_keys=True),
        },
        schema_id="tutor_speech",
    )
    return value if value is not None else dict(TUTOR_FALLBACK)


def generate_visualization(agent: OutputAgent, plan: dict, kb: KnowledgeBase) -> Optional[dict]:
    """Visualization command with catalog-membership checks; no-op fallback."""
    asset_ids = kb.asset_ids()
    aoi_ids = kb.aois.aoi_ids()

    def semantic_check(obj: dict) -> list[Violation]:
        violations = []
        if obj.get("asset_id") not in asset_ids:
            violations.append(
                Violation(".asset_id", "catalog", f"{obj.get('asset_id')!r} is not in the asset catalog")
            )
        anchor = obj.get("anchor", {})
        if anchor.get("kind") == "aoi" and anchor.get("aoi_id") not in aoi_ids:
            violations.append(
                Violation(".anchor.aoi_id", "catalog", f"{anchor.get('aoi_id')!r} is not a known AOI")
            )
        return violations

    catalog_listing = "Available assets: " + ", ".join(asset_ids) + ". Available AOIs: " + ", ".join(aoi_ids) + "."
    return agent._run(
        {
            "directive": plan.get("directive", ""),
            "assets": catalog_listing,
        },
        schema_id="visualization",
        semantic_check=semantic_check,
        repair_extra=catalog_listing,
    )


def generate_instruction(agent: OutputAgent, plan: dict, step: TaskStep) -> Optional[dict]:
    """Instruction rewrite bound to the current step; no-op fallback."""

    def semantic_check(obj: dict) -> list[Violation]:
        if obj.get("step_id") != step.step_id:
            return [
                Violation(".step_id", "current_step", f"must be the current step {step.step_id!r}")
            ]
        return []

    return agent._run(
        {
            "directive": plan.get("directive", ""),
            "step_id": step.step_id,
            "step_title": step.title,
            "step_text": step.instruction_text["standard"],
        },
        schema_id="instruction_update",
        semantic_check=semantic_check,
        repair_extra=f"The current step is {step.step_id}.",
    )
