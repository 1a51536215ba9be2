"""Uniform completion interface for all agents.

Two providers: a deterministic scripted provider driven by a fixture file
(tests and replay), and an HTTP provider speaking the common chat-completions
shape for locally hosted models.
"""
from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import requests

from .config import (
    OUTPUT_ROLES,
    OUTPUT_TEMPERATURE_MAX,
    REASONING_ROLES,
    REASONING_TEMPERATURE_MIN,
    ConfigError,
)

ROLES = REASONING_ROLES + OUTPUT_ROLES


class GatewayError(Exception):
    pass


class FixtureMissError(GatewayError):
    """Scripted provider found no fixture for the request; fixtures must be exhaustive."""


class ProviderError(GatewayError):
    pass


class TimeoutError_(GatewayError):
    pass


@dataclass(frozen=True)
class AgentProfile:
    role: str
    system_prompt: str
    temperature: float
    output_schema: Optional[str] = None
    max_tokens: int = 512
    timeout_ms: int = 10_000

    def __post_init__(self):
        if self.role not in ROLES:
            raise ConfigError(f"unknown agent role {self.role!r}")
        if self.role in REASONING_ROLES and self.temperature < REASONING_TEMPERATURE_MIN:
            raise ConfigError(f"role {self.role}: reasoning temperature must be >= {REASONING_TEMPERATURE_MIN}")
        if self.role in OUTPUT_ROLES and self.temperature > OUTPUT_TEMPERATURE_MAX:
            raise ConfigError(f"role {self.role}: output temperature must be <= {OUTPUT_TEMPERATURE_MAX}")


@dataclass(frozen=True)
class Message:
    speaker: str  # system | user | assistant
    text: str


@dataclass(frozen=True)
class CompletionRequest:
    profile: AgentProfile
    messages: tuple[Message, ...]

    def __post_init__(self):
        if not self.messages:
            raise ValueError("messages must be non-empty")
        if self.messages[0].speaker != "system":
            raise ValueError("first message must be the system prompt")

    def last_user_text(self) -> str:
        for m in reversed(self.messages):
            if m.speaker == "user":
                return m.text
        return ""

    def prompt_text(self) -> str:
        return "\n".join(m.text for m in self.messages)


@dataclass(frozen=True)
class CompletionResponse:
    text: str
    provider_name: str
    latency_ms: int


@dataclass(frozen=True)
class Fixture:
    role: str
    trigger: str
    response_text: str


def load_fixtures(path: str | Path) -> list[Fixture]:
    fixtures = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            fixtures.append(Fixture(obj["role"], obj["trigger"], obj["response_text"]))
        except (json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"{path}:{i}: bad fixture line: {exc}") from exc
    return fixtures


class ScriptedProvider:
    """Pure function of request content: case-insensitive substring match of
    each fixture trigger against the last user message, first match in file
    order wins."""

    name = "scripted"

    def __init__(self, fixtures: list[Fixture]):
        self.fixtures = fixtures

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        haystack = request.last_user_text().lower()
        for fx in self.fixtures:
            if fx.role == request.profile.role and fx.trigger.lower() in haystack:
                return CompletionResponse(text=fx.response_text, provider_name=self.name, latency_ms=0)
        raise FixtureMissError(
            f"no fixture for role={request.profile.role!r}; last user message: {haystack[:200]!r}"
        )


class HttpProvider:
    """Chat-completions HTTP provider for locally hosted models."""

    name = "http"

    def __init__(self, base_url: str, model: str, api_key_env: str = ""):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = os.environ.get(api_key_env, "") if api_key_env else ""

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": m.speaker, "content": m.text} for m in request.messages],
            "temperature": request.profile.temperature,
            "max_tokens": request.profile.max_tokens,
        }
        started = time.monotonic()
        try:
            resp = requests.post(
                f"{self.base_url}/chat/completions",
                json=body,
                headers=headers,
                timeout=request.profile.timeout_ms / 1000.0,
            )
        except requests.Timeout as exc:
            raise TimeoutError_(f"completion timed out after {request.profile.timeout_ms} ms") from exc
        except requests.RequestException as exc:
            raise ProviderError(f"completion request failed: {exc}") from exc
        if not resp.ok:
            raise ProviderError(f"provider returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            text = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError) as exc:
            raise ProviderError(f"malformed provider response: {exc}") from exc
        latency_ms = int((time.monotonic() - started) * 1000)
        return CompletionResponse(text=text, provider_name=self.name, latency_ms=latency_ms)


def truncated_prompt_hash(request: CompletionRequest) -> str:
    return hashlib.sha256(request.prompt_text().encode("utf-8")).hexdigest()[:16]


class Gateway:
    """Provider wrapper that records every call in the session log.

    Under the scripted provider the recorded latency is always zero so replay
    logs stay byte-identical. ``prompt_tap`` receives the full prompt text of
    every call (used by the privacy-firewall scan); it is never logged.
    """

    def __init__(
        self,
        provider,
        log: Optional[Callable[[str, dict], None]] = None,
        prompt_tap: Optional[Callable[[str, str], None]] = None,
    ):
        self.provider = provider
        self._log = log
        self._prompt_tap = prompt_tap
        self.call_count = 0
        self.calls_by_role: dict[str, int] = {}

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        self.call_count += 1
        role = request.profile.role
        self.calls_by_role[role] = self.calls_by_role.get(role, 0) + 1
        if self._prompt_tap is not None:
            self._prompt_tap(role, request.prompt_text())
        response = self.provider.complete(request)
        latency = 0 if isinstance(self.provider, ScriptedProvider) else response.latency_ms
        if self._log is not None:
            self._log(
                "gateway_call",
                {
                    "role": role,
                    "provider": response.provider_name,
                    "latency_ms": latency,
                    "prompt_hash": truncated_prompt_hash(request),
                },
            )
        return response


def build_provider(provider_cfg) -> ScriptedProvider | HttpProvider:
    if provider_cfg.kind == "scripted":
        return ScriptedProvider(load_fixtures(provider_cfg.fixtures_path))
    if provider_cfg.kind == "http":
        return HttpProvider(provider_cfg.base_url, provider_cfg.model, provider_cfg.api_key_env)
    raise ConfigError(f"unknown provider kind {provider_cfg.kind!r}")
