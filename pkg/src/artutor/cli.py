"""Command-line entry points: serve, replay, simulate, validate-kb, record-fixtures."""
from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click

from . import config as config_mod
from . import knowledge_base, orchestrator
from .ar_bridge import BridgeServer, load_expectations, simulate_client
from .llm_gateway import build_provider

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def _load_config(path):
    try:
        return config_mod.load(path)
    except (config_mod.ConfigError, OSError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


@click.group()
def main():
    """Adaptive AR robot-training backend."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def serve(config_path):
    """Run the WebSocket bridge until interrupted."""
    cfg = _load_config(config_path)
    try:
        kb = knowledge_base.load(cfg.kb_path)
    except knowledge_base.KnowledgeBaseError as exc:
        click.echo(f"knowledge base error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    orch = orchestrator.Orchestrator(kb, cfg)
    server = BridgeServer(orch, cfg)
    click.echo(f"listening on ws://{cfg.bridge.host}:{cfg.bridge.port}/session/<id>")
    try:
        asyncio.run(server.serve_forever())
    except KeyboardInterrupt:
        pass


@main.command()
@click.argument("trace", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Directory for the session log.")
def replay(trace, config_path, out_dir):
    """Replay a sensor trace deterministically with the scripted provider."""
    cfg = _load_config(config_path)
    log_path = None
    if out_dir is not None:
        log_path = Path(out_dir) / (Path(trace).stem + ".session.jsonl")
    try:
        log = orchestrator.replay(trace, cfg, log_path=log_path)
    except orchestrator.ReplayError as exc:
        click.echo(f"replay failed: {exc}", err=True)
        sys.exit(EXIT_FAILURE)
    commands = [r for r in log.records if r["kind"] == "command"]
    click.echo(f"replayed {trace}: {len(log.records)} log records, {len(commands)} commands")
    if log_path is not None:
        click.echo(f"log written to {log_path}")


@main.command()
@click.argument("trace", type=click.Path(exists=True))
@click.argument("expectations", type=click.Path(exists=True))
@click.option("--url", default=None, help="WebSocket session URL; defaults to the configured bridge.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def simulate(trace, expectations, url, config_path):
    """Replay a trace over the wire against a running service and check expectations."""
    cfg = _load_config(config_path)
    if url is None:
        first = Path(trace).read_text(encoding="utf-8").splitlines()[0]
        session_id = json.loads(first)["session"]
        url = f"ws://{cfg.bridge.host}:{cfg.bridge.port}/session/{session_id}"
    report = asyncio.run(simulate_client(trace, load_expectations(expectations), url))
    if report.passed:
        click.echo(f"pass: {len(report.received)} commands matched expectations")
        sys.exit(EXIT_OK)
    click.echo(f"fail: {report.diff_text()}", err=True)
    sys.exit(EXIT_FAILURE)


@main.command("validate-kb")
@click.argument("kb_path", type=click.Path(exists=True))
def validate_kb(kb_path):
    """Validate a knowledge base file and print any violations."""
    try:
        kb = knowledge_base.load(kb_path)
    except knowledge_base.KnowledgeBaseError as exc:
        click.echo(f"invalid: {exc}", err=True)
        sys.exit(EXIT_FAILURE)
    click.echo(
        f"ok: {len(kb.steps)} steps, {len(kb.rules)} rules, "
        f"{len(kb.assets)} assets, {len(kb.aois.entries)} AOIs"
    )


@main.command("record-fixtures")
@click.argument("trace", type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
def record_fixtures(trace, config_path, out_path):
    """Replay a trace against the configured HTTP provider and record replies as fixtures."""
    cfg = _load_config(config_path)
    if cfg.provider.kind != "http":
        click.echo("record-fixtures requires provider = http in the config", err=True)
        sys.exit(EXIT_CONFIG)
    provider = build_provider(cfg.provider)
    recorded = []

    class RecordingProvider:
        def complete(self, request):
            response = provider.complete(request)
            recorded.append(
                {
                    "role": request.profile.role,
                    "trigger": request.last_user_text()[:80],
                    "response_text": response.text,
                }
            )
            return response

    try:
        orchestrator.replay(trace, cfg, provider=RecordingProvider())
    except orchestrator.ReplayError as exc:
        click.echo(f"replay failed: {exc}", err=True)
        sys.exit(EXIT_FAILURE)
    with Path(out_path).open("w", encoding="utf-8") as fh:
        for fx in recorded:
            fh.write(json.dumps(fx, ensure_ascii=False) + "\n")
    click.echo(f"recorded {len(recorded)} fixtures to {out_path}")


if __name__ == "__main__":
    main()
