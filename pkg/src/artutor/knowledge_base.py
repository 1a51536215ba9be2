"""Shared knowledge base: task steps, pedagogical rules, assets and AOIs.

Loaded once from a TOML document and immutable afterwards.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .input_layer.gaze import AoiCatalog, AoiEntry

TOPICS = ("joint_control", "tcp_translation", "pick_and_place")
READING_LEVELS = ("simple", "standard", "expert")
INTERVENTIONS = ("tutor_encouragement", "visual_scaffold", "simplify_instruction", "none")


class KnowledgeBaseError(ValueError):
    """Structural problem in the knowledge base, naming the offending entity."""


@dataclass(frozen=True)
class TaskStep:
    step_id: str
    topic: str
    title: str
    instruction_text: dict
    expected_duration_s: float
    completion_event: str
    next: Optional[str] = None


@dataclass(frozen=True)
class RuleTrigger:
    """Any-of predicate per dimension; an empty tuple matches everything."""

    affect: tuple[str, ...] = ()
    load: tuple[str, ...] = ()
    step: tuple[str, ...] = ()
    topic: tuple[str, ...] = ()

    def matches(self, affect: str, load: str, step_id: str, topic: str) -> bool:
        return (
            (not self.affect or affect in self.affect)
            and (not self.load or load in self.load)
            and (not self.step or step_id in self.step)
            and (not self.topic or topic in self.topic)
        )


@dataclass(frozen=True)
class PedagogicalRule:
    rule_id: str
    trigger: RuleTrigger
    recommended_intervention: str
    priority: int


@dataclass(frozen=True)
class AssetCatalogEntry:
    asset_id: str
    kind: str
    default_scale: float
    default_color_rgba: tuple[float, float, float, float]


@dataclass(frozen=True)
class KnowledgeBase:
    steps: tuple[TaskStep, ...]
    rules: tuple[PedagogicalRule, ...]
    assets: tuple[AssetCatalogEntry, ...]
    aois: AoiCatalog

    def step(self, step_id: str) -> TaskStep:
        for s in self.steps:
            if s.step_id == step_id:
                return s
        raise KeyError(step_id)

    def asset_ids(self) -> list[str]:
        return [a.asset_id for a in self.assets]

    def match_rules(self, affect: str, load: str, step_id: str) -> list[PedagogicalRule]:
        """Rules whose trigger holds, priority descending then rule_id ascending."""
        try:
            topic = self.step(step_id).topic
        except KeyError:
            topic = ""
        hits = [r for r in self.rules if r.trigger.matches(affect, load, step_id, topic)]
        return sorted(hits, key=lambda r: (-r.priority, r.rule_id))


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise KnowledgeBaseError(message)


def _parse_steps(raw_steps: list[dict]) -> tuple[TaskStep, ...]:
    _require(bool(raw_steps), "knowledge base has no steps")
    steps = []
    seen = set()
    for raw in raw_steps:
        sid = raw.get("step_id", "<missing>")
        _require(sid not in seen, f"step {sid}: duplicate step_id")
        seen.add(sid)
        _require(raw.get("topic") in TOPICS, f"step {sid}: unknown topic {raw.get('topic')!r}")
        text = raw.get("instruction_text", {})
        for level in READING_LEVELS:
            _require(level in text and text[level], f"step {sid}: missing {level} instruction text")
        _require(raw.get("expected_duration_s", 0) > 0, f"step {sid}: expected_duration_s must be > 0")
        _require(bool(raw.get("completion_event")), f"step {sid}: missing completion_event")
        steps.append(
            TaskStep(
                step_id=sid,
                topic=raw["topic"],
                title=raw.get("title", sid),
                instruction_text=dict(text),
                expected_duration_s=float(raw["expected_duration_s"]),
                completion_event=raw["completion_event"],
                next=raw.get("next"),
            )
        )
    # Chain totality: following `next` from the first step visits every step once.
    by_id = {s.step_id: s for s in steps}
    visited = []
    cursor: Optional[TaskStep] = steps[0]
    while cursor is not None:
        _require(cursor.step_id not in visited, f"step {cursor.step_id}: chain revisits step")
        visited.append(cursor.step_id)
        if cursor.next is None:
            cursor = None
        else:
            _require(cursor.next in by_id, f"step {cursor.step_id}: next names missing step {cursor.next!r}")
            cursor = by_id[cursor.next]
    _require(len(visited) == len(steps), "step chain does not cover all steps")
    return tuple(by_id[sid] for sid in visited)


def _parse_rules(raw_rules: list[dict]) -> tuple[PedagogicalRule, ...]:
    rules = []
    seen = set()
    for raw in raw_rules:
        rid = raw.get("rule_id", "<missing>")
        _require(rid not in seen, f"rule {rid}: duplicate rule_id")
        seen.add(rid)
        rec = raw.get("recommended_intervention")
        _require(rec in INTERVENTIONS, f"rule {rid}: unknown intervention {rec!r}")
        trig = raw.get("trigger", {})
        rules.append(
            PedagogicalRule(
                rule_id=rid,
                trigger=RuleTrigger(
                    affect=tuple(trig.get("affect", [])),
                    load=tuple(trig.get("load", [])),
                    step=tuple(trig.get("step", [])),
                    topic=tuple(trig.get("topic", [])),
                ),
                recommended_intervention=rec,
                priority=int(raw.get("priority", 0)),
            )
        )
    return tuple(rules)


def _parse_assets(raw_assets: list[dict]) -> tuple[AssetCatalogEntry, ...]:
    assets = []
    seen = set()
    for raw in raw_assets:
        aid = raw.get("asset_id", "<missing>")
        _require(aid not in seen, f"asset {aid}: duplicate asset_id")
        seen.add(aid)
        assets.append(
            AssetCatalogEntry(
                asset_id=aid,
                kind=raw.get("kind", "label"),
                default_scale=float(raw.get("default_scale", 1.0)),
                default_color_rgba=tuple(raw.get("default_color_rgba", [1, 1, 1, 1])),
            )
        )
    return tuple(assets)


def _parse_aois(raw_aois: list[dict]) -> AoiCatalog:
    try:
        return AoiCatalog(
            entries=tuple(
                AoiEntry(
                    aoi_id=raw["aoi_id"],
                    center_m=tuple(raw["center_m"]),
                    radius_m=float(raw["radius_m"]),
                    label=raw.get("label", ""),
                )
                for raw in raw_aois
            )
        )
    except (KeyError, ValueError) as exc:
        raise KnowledgeBaseError(f"aoi catalog: {exc}") from exc


def load(path: str | Path) -> KnowledgeBase:
    """Load and validate the knowledge base; raises KnowledgeBaseError on any defect."""
    path = Path(path)
    with path.open("rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise KnowledgeBaseError(f"{path}: {exc}") from exc
    return KnowledgeBase(
        steps=_parse_steps(doc.get("step", [])),
        rules=_parse_rules(doc.get("rule", [])),
        assets=_parse_assets(doc.get("asset", [])),
        aois=_parse_aois(doc.get("aoi", [])),
    )
