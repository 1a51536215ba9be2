"""Runtime configuration: thresholds, temperatures, cooldowns, paths."""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

REASONING_ROLES = ("assessment", "teacher")
OUTPUT_ROLES = ("tutor", "visualization", "instruction")

REASONING_TEMPERATURE_MIN = 0.7
OUTPUT_TEMPERATURE_MAX = 0.3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class InputConfig:
    dispersion_threshold_m: float = 0.03
    min_fixation_ms: int = 150
    hrv_window_ms: int = 30_000
    hrv_hop_ms: int = 5_000
    baseline_capture_ms: int = 60_000
    stress_drop_fraction: float = 0.2
    stress_recovery_fraction: float = 0.95
    stress_sustain_ms: int = 10_000
    dwell_factor: float = 1.5
    high_velocity_rad_s: float = 1.5
    idle_velocity_rad_s: float = 0.01
    idle_after_ms: int = 10_000
    attention_lapse_ms: int = 10_000


@dataclass(frozen=True)
class ReasoningConfig:
    horizon_ms: int = 30_000
    debounce_ms: int = 2_000


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "scripted"
    fixtures_path: str = "fixtures/scripted.jsonl"
    base_url: str = "http://127.0.0.1:8080/v1"
    model: str = "local-model"
    api_key_env: str = "ARTUTOR_API_KEY"


@dataclass(frozen=True)
class BridgeConfig:
    host: str = "127.0.0.1"
    port: int = 8765
    heartbeat_s: float = 5.0
    outbound_queue_max: int = 256
    max_protocol_errors: int = 3


@dataclass(frozen=True)
class Config:
    kb_path: str = "kb/default.toml"
    prompts_dir: str = "prompts"
    logs_dir: str = "logs"
    cooldown_s: float = 15.0
    repair_budget: int = 2
    temperatures: dict = field(
        default_factory=lambda: {
            "assessment": 0.9,
            "teacher": 0.9,
            "tutor": 0.2,
            "visualization": 0.2,
            "instruction": 0.2,
        }
    )
    input: InputConfig = field(default_factory=InputConfig)
    reasoning: ReasoningConfig = field(default_factory=ReasoningConfig)
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    bridge: BridgeConfig = field(default_factory=BridgeConfig)


def _validate_temperatures(temps: dict) -> None:
    for role, temp in temps.items():
        if role not in REASONING_ROLES + OUTPUT_ROLES:
            raise ConfigError(f"unknown agent role {role!r} in temperature config")
        if not 0.0 <= temp <= 2.0:
            raise ConfigError(f"role {role}: temperature {temp} outside [0, 2]")
        if role in REASONING_ROLES and temp < REASONING_TEMPERATURE_MIN:
            raise ConfigError(
                f"role {role}: temperature {temp} too low for a reasoning agent; "
                f"raise it to at least {REASONING_TEMPERATURE_MIN} (reasoning agents "
                f"need headroom for open-ended synthesis)"
            )
        if role in OUTPUT_ROLES and temp > OUTPUT_TEMPERATURE_MAX:
            raise ConfigError(
                f"role {role}: temperature {temp} too high for an output agent; "
                f"lower it to at most {OUTPUT_TEMPERATURE_MAX} (output agents must "
                f"stay tightly bound to their JSON schemas)"
            )


def _section(doc: dict, name: str, cls, defaults):
    raw = doc.get(name, {})
    known = {f: raw[f] for f in raw if f in cls.__dataclass_fields__}
    unknown = set(raw) - set(cls.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"[{name}]: unknown keys {sorted(unknown)}")
    return replace(defaults, **known)


def load(path: Optional[str | Path] = None) -> Config:
    """Load configuration from TOML, falling back to defaults; validates policy."""
    doc: dict = {}
    if path is not None:
        with Path(path).open("rb") as fh:
            try:
                doc = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from exc
    defaults = Config()
    temps = dict(defaults.temperatures)
    temps.update(doc.get("temperatures", {}))
    cfg = Config(
        kb_path=doc.get("kb_path", defaults.kb_path),
        prompts_dir=doc.get("prompts_dir", defaults.prompts_dir),
        logs_dir=doc.get("logs_dir", defaults.logs_dir),
        cooldown_s=float(doc.get("cooldown_s", defaults.cooldown_s)),
        repair_budget=int(doc.get("repair_budget", defaults.repair_budget)),
        temperatures=temps,
        input=_section(doc, "input", InputConfig, defaults.input),
        reasoning=_section(doc, "reasoning", ReasoningConfig, defaults.reasoning),
        provider=_section(doc, "provider", ProviderConfig, defaults.provider),
        bridge=_section(doc, "bridge", BridgeConfig, defaults.bridge),
    )
    _validate_temperatures(cfg.temperatures)
    return cfg
