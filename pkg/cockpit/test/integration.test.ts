// End-to-end: drive a learner-in-trouble session against the real backend
// over WebSocket using the cockpit controls, and assert the rendered state.
// Requires the backend package to be installed (pip install -e ..).

import { spawn, type ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { CockpitClient } from "../src/client.js";
import { DEFAULT_AOIS } from "../src/controls.js";
import { renderBubble, renderInstruction, renderWorkspace } from "../src/render.js";
import { makeValidator, REPO_ROOT } from "./helpers.js";

const BRIDGE_SCRIPT = `
import asyncio
from dataclasses import replace
from artutor import config as config_mod, knowledge_base
from artutor.ar_bridge import BridgeServer
from artutor.orchestrator import Orchestrator

async def main():
    cfg = config_mod.load()
    cfg = replace(cfg, logs_dir="", bridge=replace(cfg.bridge, port=0, heartbeat_s=60.0))
    kb = knowledge_base.load(cfg.kb_path)
    server = BridgeServer(Orchestrator(kb, cfg), cfg)
    port = await server.start()
    print(f"PORT={port}", flush=True)
    await asyncio.Future()

asyncio.run(main())
`;

let bridge: ChildProcess;
let url: string;

beforeAll(async () => {
  bridge = spawn("python3", ["-c", BRIDGE_SCRIPT], { cwd: REPO_ROOT });
  url = await new Promise<string>((resolve, reject) => {
    let out = "";
    const timer = setTimeout(() => reject(new Error("bridge did not start: " + out)), 15_000);
    bridge.stdout!.on("data", (chunk) => {
      out += String(chunk);
      const match = out.match(/PORT=(\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(`ws://127.0.0.1:${match[1]}`);
      }
    });
    bridge.stderr!.on("data", (chunk) => {
      out += String(chunk);
    });
    bridge.on("exit", (code) => reject(new Error(`bridge exited early (${code}): ${out}`)));
  });
}, 20_000);

afterAll(() => {
  bridge?.kill();
});

describe("cockpit against the live backend", () => {
  it(
    "frustration, confusion and overload each produce their intervention",
    async () => {
      const client = new CockpitClient(url, "cockpit-e2e", makeValidator(), {
        webSocket: WebSocket as any,
      });
      await client.connect();
      client.open(0);

      const tcp = DEFAULT_AOIS.find((a) => a.aoiId === "tcp")!;
      const send = (env: Parameters<CockpitClient["send"]>[0]) => client.send(env);

      // Work through the first two steps, then look at the tool.
      send(client.frames.stepComplete(5_000, "s1"));
      send(client.frames.stepComplete(10_000, "s2"));
      send(client.frames.gazeBurst(15_000, tcp));
      send(client.frames.heartRate(20_000, 72, 3));

      // Frustration: spoken complaint -> encouraging tutor bubble.
      send(client.frames.utterance(40_000, "I don't get this at all."));
      await client.waitFor((s) => s.bubble !== null, 10_000);
      expect(client.state.bubble!.tone).toBe("encouraging");
      expect(renderBubble(client.state)).toContain("tone-badge");

      // Confusion about directions (next 30 s window) -> arrow glyph at the tcp.
      send(client.frames.utterance(80_000, "Which way is the X axis from here?"));
      await client.waitFor((s) => s.glyphsAt(80_000).length > 0, 10_000);
      const glyph = client.state.glyphsAt(80_000)[0];
      expect(glyph.assetId).toBe("arrow");
      expect(glyph.anchor).toEqual({ kind: "aoi", aoi_id: "tcp" });
      expect(renderWorkspace(client.state, 80_000)).toContain('data-asset="arrow"');

      // Overload -> simplified instruction pane for the current step.
      send(client.frames.utterance(120_000, "This is too complicated for me."));
      await client.waitFor((s) => s.instruction !== null, 10_000);
      expect(client.state.instruction!.stepId).toBe("s3");
      expect(client.state.instruction!.readingLevel).toBe("simple");
      expect(renderInstruction(client.state)).toContain("level-simple");

      // Every inbound envelope passed client-side schema validation.
      expect(client.invalidInbound).toBe(0);
      expect(client.received.length).toBeGreaterThanOrEqual(4); // open ack + 3 commands

      client.closeSession(120_000);
      await client.waitFor(
        (s) => s.timeline.some((e) => e.kind === "session" && e.summary === "ack close"),
        10_000,
      );
      client.disconnect();
    },
    30_000,
  );
});
