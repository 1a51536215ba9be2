import { describe, expect, it } from "vitest";

import type { Envelope } from "../src/protocol.js";
import { renderBubble, renderInstruction, renderTimeline, renderWorkspace } from "../src/render.js";
import { CockpitState } from "../src/state.js";

let seq = 0;

function command(tMs: number, payload: Record<string, unknown>): Envelope {
  seq += 1;
  return { v: 1, type: "adaptation_command", session: "s1", seq, t_ms: tMs, payload };
}

function control(tMs: number, payload: Record<string, unknown>): Envelope {
  seq += 1;
  return { v: 1, type: "session_control", session: "s1", seq, t_ms: tMs, payload };
}

const ARROW = {
  command: "visualization",
  action: "spawn",
  asset_id: "arrow",
  anchor: { kind: "aoi", aoi_id: "tcp" },
  scale: 1.0,
  color_rgba: [1, 0.5, 0, 1],
  lifetime_s: 10,
};

describe("CockpitState", () => {
  it("tutor speech becomes the bubble", () => {
    const state = new CockpitState();
    state.apply(command(100, { command: "tutor_speech", text: "Keep at it.", tone: "encouraging" }));
    expect(state.bubble).toMatchObject({ text: "Keep at it.", tone: "encouraging" });
  });

  it("a newer tutor line replaces the bubble", () => {
    const state = new CockpitState();
    state.apply(command(100, { command: "tutor_speech", text: "First", tone: "neutral" }));
    state.apply(command(200, { command: "tutor_speech", text: "Second", tone: "celebratory" }));
    expect(state.bubble?.text).toBe("Second");
  });

  it("spawned glyphs expire after their lifetime", () => {
    const state = new CockpitState();
    state.apply(command(1000, ARROW));
    expect(state.glyphsAt(1000)).toHaveLength(1);
    expect(state.glyphsAt(11_000)).toHaveLength(1); // exactly at the boundary
    expect(state.glyphsAt(11_001)).toHaveLength(0);
  });

  it("remove drops glyphs by asset id", () => {
    const state = new CockpitState();
    state.apply(command(1000, ARROW));
    state.apply(command(2000, { ...ARROW, action: "remove" }));
    expect(state.glyphsAt(2000)).toHaveLength(0);
  });

  it("instruction updates swap the pane", () => {
    const state = new CockpitState();
    state.apply(
      command(100, {
        command: "instruction_update",
        step_id: "s3",
        text: "Slide the tool tip.",
        reading_level: "simple",
      }),
    );
    expect(state.instruction).toMatchObject({ stepId: "s3", readingLevel: "simple" });
  });

  it("timeline records commands, acks and errors but not heartbeats", () => {
    const state = new CockpitState();
    state.apply(control(0, { action: "ack", of: "open" }));
    state.apply(control(100, { action: "heartbeat" }));
    state.apply(command(200, { command: "tutor_speech", text: "x", tone: "neutral" }));
    state.apply(control(300, { action: "error", detail: "sequence regression at seq 4" }));
    expect(state.timeline.map((e) => e.kind)).toEqual(["session", "tutor", "error"]);
    expect(state.lastErrorDetail).toContain("sequence regression");
  });
});

describe("rendering", () => {
  it("bubble shows the tone badge and escaped text", () => {
    const state = new CockpitState();
    state.apply(command(100, { command: "tutor_speech", text: "a < b", tone: "encouraging" }));
    const html = renderBubble(state);
    expect(html).toContain('class="tone-badge"');
    expect(html).toContain("encouraging");
    expect(html).toContain("a &lt; b");
  });

  it("workspace schematic shows AOIs and live glyphs only", () => {
    const state = new CockpitState();
    state.apply(command(1000, ARROW));
    const live = renderWorkspace(state, 1000);
    expect(live).toContain('data-aoi="tcp"');
    expect(live).toContain('data-asset="arrow"');
    const later = renderWorkspace(state, 20_000);
    expect(later).not.toContain('data-asset="arrow"');
  });

  it("instruction pane carries the reading level badge", () => {
    const state = new CockpitState();
    state.apply(
      command(100, {
        command: "instruction_update",
        step_id: "s3",
        text: "Easy words.",
        reading_level: "simple",
      }),
    );
    const html = renderInstruction(state);
    expect(html).toContain('data-step="s3"');
    expect(html).toContain("level-simple");
  });

  it("timeline renders one row per entry", () => {
    const state = new CockpitState();
    state.apply(command(1500, { command: "tutor_speech", text: "x", tone: "neutral" }));
    const html = renderTimeline(state);
    expect(html).toContain("1.5s");
    expect(html).toContain("tutor");
  });
});
