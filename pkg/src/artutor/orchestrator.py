"""Closed-loop session engine: sensing, understanding, acting.

Each session is a single-writer state machine driven by sensor frames. The
clock is virtual: all timing decisions (debounce, cooldowns, windows) key
off frame timestamps, which makes replayed sessions byte-identical.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import knowledge_base, protocol
from .config import Config, OUTPUT_ROLES, REASONING_ROLES
from .input_layer.frames import FrameInputError, SensorFrame, parse_frame
from .input_layer.gaze import FixationParams, GazeAnalyzer, map_fixation
from .input_layer.hrv import BaselineEstimator, RrWindow, StressClassifier
from .input_layer.kinematics import RobotDataAnalyzer
from .input_layer.progress import ProgressTracker
from .input_layer.voice import UtteranceInputError, ingest_utterance
from .llm_gateway import AgentProfile, Gateway, build_provider
from .output_layer import (
    OutputAgent,
    generate_instruction,
    generate_tutor,
    generate_visualization,
)
from .protocol import SemanticEvent
from .reasoning_layer import (
    ContextWindow,
    LearnerAssessment,
    TARGET_COMMAND_TYPE,
    assess,
    decide,
)


class SessionError(Exception):
    pass


class ReplayError(Exception):
    def __init__(self, message: str, line_no: Optional[int] = None):
        super().__init__(message)
        self.line_no = line_no


class SessionLog:
    """Append-only JSONL session log with monotone timestamps."""

    def __init__(self, path: Optional[Path] = None):
        self.path = path
        self.records: list[dict] = []
        self._lines: list[str] = []
        self._last_t = 0
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text("", encoding="utf-8")

    def append(self, t_ms: int, kind: str, body: dict) -> None:
        t_ms = max(t_ms, self._last_t)
        self._last_t = t_ms
        record = {"t_ms": t_ms, "kind": kind, "body": body}
        line = json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
        self.records.append(record)
        self._lines.append(line)
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def lines(self) -> list[str]:
        return list(self._lines)

    def text(self) -> str:
        return "".join(line + "\n" for line in self._lines)

    def digest(self) -> str:
        return hashlib.sha256(self.text().encode("utf-8")).hexdigest()


@dataclass
class PromptSet:
    system: dict[str, str]
    template: dict[str, str]

    @classmethod
    def load(cls, prompts_dir: str | Path) -> "PromptSet":
        prompts_dir = Path(prompts_dir)
        roles = REASONING_ROLES + OUTPUT_ROLES
        system = {}
        template = {}
        for role in roles:
            system[role] = (prompts_dir / f"{role}_system.txt").read_text(encoding="utf-8")
            template[role] = (prompts_dir / f"{role}.txt").read_text(encoding="utf-8")
        return cls(system=system, template=template)


def build_profiles(config: Config, prompts: PromptSet) -> dict[str, AgentProfile]:
    profiles = {}
    for role in REASONING_ROLES + OUTPUT_ROLES:
        schema = {
            "assessment": "learner_assessment",
            "teacher": "intervention_plan",
            "tutor": "tutor_speech",
            "visualization": "visualization",
            "instruction": "instruction_update",
        }[role]
        profiles[role] = AgentProfile(
            role=role,
            system_prompt=prompts.system[role],
            temperature=config.temperatures[role],
            output_schema=schema,
        )
    return profiles


class Session:
    """Single learner session: analyzers, context window, reasoning cadence."""

    def __init__(
        self,
        session_id: str,
        kb: knowledge_base.KnowledgeBase,
        config: Config,
        provider,
        log: Optional[SessionLog] = None,
        prompt_tap=None,
    ):
        self.session_id = session_id
        self.kb = kb
        self.config = config
        self.log = log or SessionLog()
        self.now_ms = 0
        self._event_counter = 0
        self._command_counter = 0

        prompts = PromptSet.load(config.prompts_dir)
        self.profiles = build_profiles(config, prompts)
        self.prompts = prompts
        self.gateway = Gateway(
            provider,
            log=lambda kind, body: self.log.append(self.now_ms, kind, body),
            prompt_tap=prompt_tap,
        )
        self._output_agents = {
            role: OutputAgent(
                self.gateway, self.profiles[role], prompts.template[role], config.repair_budget
            )
            for role in OUTPUT_ROLES
        }

        ic = config.input
        self.progress = ProgressTracker(kb.steps, dwell_factor=ic.dwell_factor)
        self.gaze = GazeAnalyzer(
            kb.aois, FixationParams(ic.dispersion_threshold_m, ic.min_fixation_ms)
        )
        self.rr_window = RrWindow(ic.hrv_window_ms)
        self.baseline = BaselineEstimator(ic.baseline_capture_ms)
        self.stress = StressClassifier(
            ic.stress_drop_fraction, ic.stress_recovery_fraction, ic.stress_sustain_ms
        )
        self.robot = RobotDataAnalyzer(
            ic.high_velocity_rad_s, ic.idle_velocity_rad_s, ic.idle_after_ms
        )
        self._next_hrv_ms = ic.hrv_window_ms
        self._gaze_seen = False
        self._last_fixation_ms: Optional[int] = None
        self._attention_lapse_flagged = False

        self.window_events: list[SemanticEvent] = []
        self.last_assessment: Optional[LearnerAssessment] = None
        self._last_assess_ms: Optional[int] = None
        self._pending_events = False
        self.cooldowns: dict[str, int] = {}
        self.closed = False

        self.log.append(0, "lifecycle", {"action": "open", "session": session_id})

    # -- input layer ---------------------------------------------------

    def _emit(self, event: SemanticEvent) -> Optional[SemanticEvent]:
        self._event_counter += 1
        event.event_id = f"e{self._event_counter:06d}"
        result = event.validate()
        if not result.ok:
            self.log.append(
                self.now_ms,
                "error",
                {
                    "where": "privacy_gate",
                    "event_kind": event.kind,
                    "violations": [v.to_dict() for v in result.violations],
                },
            )
            return None
        self.log.append(self.now_ms, "event", event.to_dict())
        self.window_events.append(event)
        self._pending_events = True
        return event

    def _analyze(self, frame: SensorFrame) -> None:
        ic = self.config.input
        if frame.utterance is not None:
            try:
                self._emit(ingest_utterance(frame.utterance, t_ms=frame.t_ms))
            except UtteranceInputError as exc:
                self.log.append(self.now_ms, "error", {"where": "voice_analyzer", "detail": str(exc)})

        if frame.app_event is not None:
            for ev in self.progress.on_app_event(
                frame.app_event.name, frame.app_event.step_id, frame.t_ms
            ):
                self._emit(ev)
        for ev in self.progress.on_clock(frame.t_ms):
            self._emit(ev)

        if frame.gaze:
            self._gaze_seen = True
            for fixation in self.gaze.push(frame.gaze):
                event = map_fixation(fixation, self.kb.aois)
                if event is not None:
                    self._last_fixation_ms = fixation.end_ms
                    self._attention_lapse_flagged = False
                    self._emit(event)
        if self._gaze_seen and not self._attention_lapse_flagged:
            anchor = self._last_fixation_ms if self._last_fixation_ms is not None else 0
            if frame.t_ms - anchor > ic.attention_lapse_ms:
                self._attention_lapse_flagged = True
                self._emit(
                    SemanticEvent(
                        event_id="",
                        kind="custom",
                        source="gaze_analyzer",
                        t_ms=frame.t_ms,
                        confidence=0.5,
                        attributes={"name": "low_attention", "since_ms": frame.t_ms - anchor},
                    )
                )

        if frame.joints is not None:
            for ev in self.robot.push(frame.joints):
                self._emit(ev)

        if frame.rr:
            self.rr_window.push(frame.t_ms, frame.rr)
        while frame.t_ms >= self._next_hrv_ms:
            hop_t = self._next_hrv_ms
            self._next_hrv_ms += ic.hrv_hop_ms
            metrics = self.rr_window.metrics(hop_t)
            if metrics is None:
                continue
            self.baseline.observe(hop_t, metrics)
            base = self.baseline.baseline(hop_t)
            if base is not None and base.rmssd_ms > 0:
                ev = self.stress.classify(hop_t, metrics, base)
                if ev is not None:
                    self._emit(ev)

    # -- reasoning / output --------------------------------------------

    def _prune_window(self) -> None:
        cutoff = self.now_ms - self.config.reasoning.horizon_ms
        kept = [ev for ev in self.window_events if ev.t_ms >= cutoff]
        # Analyzers may emit an event whose time lies slightly in the past
        # (a fixation ends before the sample that breaks it); stable-sort to
        # keep the window time-ordered.
        kept.sort(key=lambda ev: ev.t_ms)
        self.window_events = kept

    def _cooled_down_types(self) -> list[str]:
        cooldown_ms = self.config.cooldown_s * 1000.0
        return [
            ctype
            for ctype, t in self.cooldowns.items()
            if self.now_ms - t < cooldown_ms
        ]

    def _reasoning_cycle(self) -> list[dict]:
        self._prune_window()
        window = ContextWindow(
            horizon_ms=self.config.reasoning.horizon_ms,
            now_ms=self.now_ms,
            events=tuple(self.window_events),
            last_assessment=self.last_assessment,
        )
        outcome = assess(
            window,
            self.profiles["assessment"],
            self.gateway,
            self.prompts.template["assessment"],
            self.progress.current_step_id,
            self.config.repair_budget,
        )
        if outcome.skipped:
            self.log.append(self.now_ms, "error", {"where": "assessment", "detail": "cycle skipped"})
            return []
        self.last_assessment = outcome.assessment
        self.log.append(
            self.now_ms,
            "assessment",
            {**outcome.assessment.to_dict(), "revised": outcome.revised},
        )
        if not outcome.revised:
            return []

        plan = decide(
            outcome.assessment,
            self.kb,
            self.profiles["teacher"],
            self.gateway,
            self.prompts.template["teacher"],
            cooled_down=self._cooled_down_types(),
            repair_budget=self.config.repair_budget,
        )
        self.log.append(self.now_ms, "plan", plan.to_dict())
        if plan.decision != "intervene":
            return []
        return self._act(plan, outcome.assessment)

    def _act(self, plan, assessment: LearnerAssessment) -> list[dict]:
        plan_dict = plan.to_dict()
        command: Optional[dict] = None
        if plan.target == "tutor":
            command = generate_tutor(self._output_agents["tutor"], plan_dict, assessment.to_dict())
        elif plan.target == "visualization":
            command = generate_visualization(self._output_agents["visualization"], plan_dict, self.kb)
        elif plan.target == "instruction":
            command = generate_instruction(
                self._output_agents["instruction"], plan_dict, self.progress.current_step
            )
        if command is None:
            self.log.append(self.now_ms, "error", {"where": plan.target, "detail": "enforcement failure, no-op fallback"})
            return []
        result = protocol.validate_object(command, "adaptation_command")
        if not result.ok:
            self.log.append(
                self.now_ms,
                "error",
                {"where": plan.target, "detail": "command failed final validation", "violations": [v.to_dict() for v in result.violations]},
            )
            return []
        ctype = TARGET_COMMAND_TYPE[plan.target]
        self.cooldowns[ctype] = self.now_ms
        self._command_counter += 1
        self.log.append(self.now_ms, "command", command)
        return [command]

    # -- public surface --------------------------------------------------

    def process_frame(self, payload: dict | SensorFrame) -> list[dict]:
        """Run one frame through the full loop; returns emitted commands."""
        if self.closed:
            raise SessionError(f"session {self.session_id} is closed")
        try:
            frame = payload if isinstance(payload, SensorFrame) else parse_frame(payload)
        except FrameInputError as exc:
            self.log.append(self.now_ms, "error", {"where": "frame", "detail": str(exc)})
            return []
        self.now_ms = max(self.now_ms, frame.t_ms)
        self.log.append(self.now_ms, "frame", {"t_ms": frame.t_ms})
        self._analyze(frame)

        debounce = self.config.reasoning.debounce_ms
        due = self._last_assess_ms is None or self.now_ms - self._last_assess_ms >= debounce
        if self._pending_events and due:
            self._pending_events = False
            self._last_assess_ms = self.now_ms
            return self._reasoning_cycle()
        return []

    def reset(self) -> None:
        self.progress.reset(self.now_ms)
        self.gaze.reset()
        self.rr_window.reset()
        self.baseline.reset()
        self.stress.reset()
        self.robot.reset()
        self.window_events = []
        self.last_assessment = None
        self._last_assess_ms = None
        self._pending_events = False
        self.cooldowns = {}
        self._gaze_seen = False
        self._last_fixation_ms = None
        self._attention_lapse_flagged = False
        self.log.append(self.now_ms, "lifecycle", {"action": "reset", "session": self.session_id})

    def close(self) -> None:
        if not self.closed:
            self.closed = True
            self.log.append(self.now_ms, "lifecycle", {"action": "close", "session": self.session_id})


class Orchestrator:
    """Owns sessions and routes envelopes from the bridge."""

    def __init__(self, kb: knowledge_base.KnowledgeBase, config: Config, provider=None, prompt_tap=None):
        self.kb = kb
        self.config = config
        self.provider = provider if provider is not None else build_provider(config.provider)
        self.prompt_tap = prompt_tap
        self.sessions: dict[str, Session] = {}

    def open(self, session_id: str, log_path: Optional[Path] = None) -> Session:
        if session_id in self.sessions and not self.sessions[session_id].closed:
            raise SessionError(f"session {session_id} is already open")
        if log_path is None and self.config.logs_dir:
            log_path = Path(self.config.logs_dir) / session_id / "session.jsonl"
        session = Session(
            session_id,
            self.kb,
            self.config,
            self.provider,
            log=SessionLog(log_path),
            prompt_tap=self.prompt_tap,
        )
        self.sessions[session_id] = session
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise SessionError(f"unknown session {session_id!r}") from None

    def session_control(self, session_id: str, action: str) -> dict:
        if action == "open":
            self.open(session_id)
        elif action == "close":
            self.get(session_id).close()
        elif action == "reset":
            self.get(session_id).reset()
        else:
            raise SessionError(f"unknown session control action {action!r}")
        return {"action": "ack", "of": action}


def replay(
    trace_path: str | Path,
    config: Config,
    provider=None,
    log_path: Optional[Path] = None,
    prompt_tap=None,
) -> SessionLog:
    """Replay a JSONL sensor trace deterministically under the virtual clock."""
    kb = knowledge_base.load(config.kb_path)
    if provider is None:
        if config.provider.kind != "scripted":
            raise ReplayError("replay requires the scripted provider")
        provider = build_provider(config.provider)

    session: Optional[Session] = None
    trace_path = Path(trace_path)
    with trace_path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                envelope = protocol.decode(line)
            except protocol.ProtocolError as exc:
                raise ReplayError(f"{trace_path}:{line_no}: {exc}", line_no) from exc
            if envelope.type != "sensor_frame":
                raise ReplayError(
                    f"{trace_path}:{line_no}: expected sensor_frame, got {envelope.type}", line_no
                )
            if session is None:
                session = Session(
                    envelope.session, kb, config, provider,
                    log=SessionLog(log_path), prompt_tap=prompt_tap,
                )
            session.process_frame(envelope.payload)
    if session is None:
        session = Session("replay", kb, config, provider, log=SessionLog(log_path), prompt_tap=prompt_tap)
    session.close()
    return session.log
