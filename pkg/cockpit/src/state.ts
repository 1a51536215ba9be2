// Cockpit view state: a reducer over inbound envelopes. Rendering reads this
// snapshot; nothing here touches the DOM.

import type { Envelope } from "./protocol.js";

export interface TutorBubble {
  text: string;
  tone: "encouraging" | "neutral" | "celebratory";
  tMs: number;
}

export interface Anchor {
  kind: "aoi" | "world";
  aoi_id?: string;
  position_m?: [number, number, number];
}

export interface Glyph {
  assetId: string;
  anchor: Anchor;
  scale: number;
  colorRgba: [number, number, number, number];
  lifetimeS: number;
  spawnedAtMs: number;
}

export interface InstructionPane {
  stepId: string;
  text: string;
  readingLevel: "simple" | "standard" | "expert";
  tMs: number;
}

export interface TimelineEntry {
  tMs: number;
  kind: string;
  summary: string;
}

export class CockpitState {
  bubble: TutorBubble | null = null;
  glyphs: Glyph[] = [];
  instruction: InstructionPane | null = null;
  timeline: TimelineEntry[] = [];
  lastErrorDetail: string | null = null;

  apply(env: Envelope): void {
    if (env.type === "adaptation_command") {
      this.applyCommand(env.t_ms, env.payload);
    } else if (env.type === "session_control") {
      this.applyControl(env.t_ms, env.payload);
    }
  }

  private record(tMs: number, kind: string, summary: string): void {
    this.timeline.push({ tMs, kind, summary });
  }

  private applyCommand(tMs: number, payload: Record<string, unknown>): void {
    const command = payload["command"];
    if (command === "tutor_speech") {
      this.bubble = {
        text: payload["text"] as string,
        tone: payload["tone"] as TutorBubble["tone"],
        tMs,
      };
      this.record(tMs, "tutor", `"${payload["text"]}" (${payload["tone"]})`);
    } else if (command === "visualization") {
      const assetId = payload["asset_id"] as string;
      if (payload["action"] === "remove") {
        this.glyphs = this.glyphs.filter((g) => g.assetId !== assetId);
        this.record(tMs, "visualization", `remove ${assetId}`);
      } else {
        this.glyphs.push({
          assetId,
          anchor: payload["anchor"] as Anchor,
          scale: payload["scale"] as number,
          colorRgba: payload["color_rgba"] as Glyph["colorRgba"],
          lifetimeS: payload["lifetime_s"] as number,
          spawnedAtMs: tMs,
        });
        this.record(tMs, "visualization", `spawn ${assetId}`);
      }
    } else if (command === "instruction_update") {
      this.instruction = {
        stepId: payload["step_id"] as string,
        text: payload["text"] as string,
        readingLevel: payload["reading_level"] as InstructionPane["readingLevel"],
        tMs,
      };
      this.record(tMs, "instruction", `${payload["step_id"]} -> ${payload["reading_level"]}`);
    }
  }

  private applyControl(tMs: number, payload: Record<string, unknown>): void {
    const action = payload["action"];
    if (action === "heartbeat") {
      return; // keepalive noise, not worth a timeline row
    }
    if (action === "error") {
      this.lastErrorDetail = (payload["detail"] as string) ?? "unknown error";
      this.record(tMs, "error", this.lastErrorDetail);
    } else if (action === "ack") {
      this.record(tMs, "session", `ack ${payload["of"]}`);
    }
  }

  /** Glyphs still alive at the given session time. */
  glyphsAt(nowMs: number): Glyph[] {
    return this.glyphs.filter((g) => nowMs - g.spawnedAtMs <= g.lifetimeS * 1000);
  }
}
