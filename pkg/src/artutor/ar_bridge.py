"""Wire endpoint standing in for the AR application boundary.

Serves `/session/<id>` over WebSocket (one envelope per text frame, newline
terminated), routes sensor frames into the session loop and adaptation
commands back out, plus a headless simulated AR client used for end-to-end
checks.
"""
from __future__ import annotations

import asyncio
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import websockets

from . import protocol
from .config import Config
from .orchestrator import Orchestrator, SessionError


class BridgeServer:
    def __init__(self, orchestrator: Orchestrator, config: Config, command_tap=None):
        self.orchestrator = orchestrator
        self.config = config
        self.command_tap = command_tap
        self._server = None

    async def start(self) -> int:
        bc = self.config.bridge
        self._server = await websockets.serve(self._handle, bc.host, bc.port)
        return self._server.sockets[0].getsockname()[1]

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def serve_forever(self) -> None:
        await self.start()
        await asyncio.Future()

    def _session_id_from_path(self, path: str) -> Optional[str]:
        parts = path.strip("/").split("/")
        if len(parts) == 2 and parts[0] == "session" and parts[1]:
            return parts[1]
        return None

    async def _handle(self, ws) -> None:
        path = ws.request.path if hasattr(ws, "request") else ws.path
        session_id = self._session_id_from_path(path)
        if session_id is None:
            await ws.close(code=4000, reason="path must be /session/<id>")
            return

        out_seq = 0
        seq_tracker = protocol.SequenceTracker()
        error_streak = 0
        queue: asyncio.Queue = asyncio.Queue(maxsize=self.config.bridge.outbound_queue_max)
        virtual_now = 0

        async def send_envelope(env_type: str, payload: dict) -> None:
            nonlocal out_seq
            out_seq += 1
            env = protocol.Envelope(
                type=env_type, session=session_id, seq=out_seq, t_ms=virtual_now, payload=payload
            )
            line = protocol.encode(env)
            try:
                queue.put_nowait(line)
            except asyncio.QueueFull:
                # Slow client; close rather than stall the session loop.
                await ws.close(code=1013, reason="outbound queue overflow")

        async def writer():
            while True:
                line = await queue.get()
                await ws.send(line)

        async def heartbeat():
            while True:
                await asyncio.sleep(self.config.bridge.heartbeat_s)
                await send_envelope("session_control", {"action": "heartbeat"})

        writer_task = asyncio.create_task(writer())
        heartbeat_task = asyncio.create_task(heartbeat())
        try:
            async for raw in ws:
                try:
                    envelope = protocol.decode(raw)
                except protocol.ProtocolError as exc:
                    error_streak += 1
                    await send_envelope(
                        "session_control",
                        {
                            "action": "error",
                            "detail": str(exc),
                            "violations": [v.to_dict() for v in exc.violations],
                        },
                    )
                    if error_streak >= self.config.bridge.max_protocol_errors:
                        await ws.close(code=1002, reason="too many protocol errors")
                        break
                    continue

                if envelope.session != session_id:
                    error_streak += 1
                    await send_envelope(
                        "session_control",
                        {"action": "error", "detail": "session id does not match connection path"},
                    )
                    continue
                if not seq_tracker.accept(session_id, "client", envelope.seq):
                    error_streak += 1
                    await send_envelope(
                        "session_control",
                        {"action": "error", "detail": f"sequence regression at seq {envelope.seq}"},
                    )
                    continue
                error_streak = 0
                virtual_now = max(virtual_now, envelope.t_ms)

                if envelope.type == "session_control":
                    action = envelope.payload.get("action")
                    try:
                        ack = self.orchestrator.session_control(session_id, action)
                    except SessionError as exc:
                        await send_envelope("session_control", {"action": "error", "detail": str(exc)})
                        continue
                    await send_envelope("session_control", ack)
                elif envelope.type == "sensor_frame":
                    try:
                        session = self.orchestrator.get(session_id)
                    except SessionError as exc:
                        await send_envelope("session_control", {"action": "error", "detail": str(exc)})
                        continue
                    commands = session.process_frame(envelope.payload)
                    for command in commands:
                        if self.command_tap is not None:
                            self.command_tap(session_id, command)
                        await send_envelope("adaptation_command", command)
                else:
                    await send_envelope(
                        "session_control",
                        {"action": "error", "detail": f"unexpected inbound type {envelope.type}"},
                    )
        finally:
            writer_task.cancel()
            heartbeat_task.cancel()


@dataclass
class Expectation:
    command: str
    match: dict = field(default_factory=dict)


@dataclass
class SimulationReport:
    passed: bool
    received: list[dict]
    detail: str = ""

    def diff_text(self) -> str:
        return self.detail


def load_expectations(path: str | Path) -> list[Expectation]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return [Expectation(command=e["command"], match=e.get("match", {})) for e in doc]


def _matches(command: dict, expectation: Expectation) -> bool:
    if command.get("command") != expectation.command:
        return False
    return all(command.get(k) == v for k, v in expectation.match.items())


async def simulate_client(
    trace_path: str | Path,
    expectations: list[Expectation],
    url: str,
    timeout_s: float = 10.0,
) -> SimulationReport:
    """Replay a sensor trace over the wire and check received commands."""
    lines = [ln for ln in Path(trace_path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    received: list[dict] = []

    async with websockets.connect(url) as ws:
        envelopes = [protocol.decode(ln) for ln in lines]
        session_id = envelopes[0].session if envelopes else "sim"
        seq = 0

        async def send(env_type: str, t_ms: int, payload: dict):
            nonlocal seq
            seq += 1
            await ws.send(
                protocol.encode(
                    protocol.Envelope(type=env_type, session=session_id, seq=seq, t_ms=t_ms, payload=payload)
                )
            )

        async def drain(stop_on_close_ack: bool):
            while True:
                raw = await asyncio.wait_for(ws.recv(), timeout=timeout_s)
                env = protocol.decode(raw)
                if env.type == "adaptation_command":
                    received.append(env.payload)
                elif env.type == "session_control" and env.payload.get("of") == "close":
                    return

        await send("session_control", 0, {"action": "open"})
        for env in envelopes:
            await send("sensor_frame", env.t_ms, env.payload)
        last_t = envelopes[-1].t_ms if envelopes else 0
        await send("session_control", last_t, {"action": "close"})
        try:
            await drain(stop_on_close_ack=True)
        except asyncio.TimeoutError:
            return SimulationReport(False, received, "timeout waiting for close acknowledgement")

    remaining = list(expectations)
    for command in received:
        if remaining and _matches(command, remaining[0]):
            remaining.pop(0)
    if remaining:
        detail = (
            "unmet expectations: "
            + json.dumps([{"command": e.command, "match": e.match} for e in remaining])
            + "; received: "
            + json.dumps(received)
        )
        return SimulationReport(False, received, detail)
    if len(received) != len(expectations):
        return SimulationReport(
            False,
            received,
            f"expected exactly {len(expectations)} commands, received {len(received)}: "
            + json.dumps(received),
        )
    return SimulationReport(True, received)
