// Operator controls: each control synthesizes a sensor_frame envelope the
// backend accepts, so the cockpit can stand in for a real headset.

import type { Envelope } from "./protocol.js";

export interface AoiEntry {
  aoiId: string;
  centerM: [number, number, number];
  radiusM: number;
  label: string;
}

// Mirrors the [[aoi]] catalog in kb/default.toml; the workspace schematic and
// the gaze picker both draw from it.
export const DEFAULT_AOIS: AoiEntry[] = [
  { aoiId: "gripper", centerM: [0.45, 0.1, 0.35], radiusM: 0.1, label: "Gripper" },
  { aoiId: "tcp", centerM: [0.45, 0.1, 0.42], radiusM: 0.08, label: "Tool center point" },
  { aoiId: "workpiece", centerM: [0.55, -0.2, 0.05], radiusM: 0.08, label: "Workpiece" },
  { aoiId: "target_carrier", centerM: [0.55, 0.3, 0.05], radiusM: 0.1, label: "Target carrier" },
  { aoiId: "control_panel", centerM: [0.1, -0.45, 0.3], radiusM: 0.15, label: "Virtual control panel" },
];

export interface GazeBurstOptions {
  samples?: number;
  periodMs?: number;
}

/** RR intervals for a given heart rate: 60000/bpm, alternating +/- jitter%. */
export function synthesizeRr(bpm: number, jitterPct: number, count: number): number[] {
  if (bpm <= 0) {
    throw new Error(`bpm must be positive, got ${bpm}`);
  }
  const base = 60000 / bpm;
  const delta = base * (jitterPct / 100);
  const rr: number[] = [];
  for (let i = 0; i < count; i++) {
    rr.push(base + (i % 2 === 0 ? delta : -delta));
  }
  return rr;
}

/** Builds sensor_frame envelopes with a monotone sequence number. */
export class FrameBuilder {
  private seq = 0;

  constructor(public readonly session: string) {}

  private envelope(type: Envelope["type"], tMs: number, payload: Record<string, unknown>): Envelope {
    this.seq += 1;
    return { v: 1, type, session: this.session, seq: this.seq, t_ms: tMs, payload };
  }

  sessionControl(tMs: number, action: "open" | "close" | "reset"): Envelope {
    return this.envelope("session_control", tMs, { action });
  }

  utterance(tMs: number, text: string): Envelope {
    return this.envelope("sensor_frame", tMs, { t_ms: tMs, utterance: text });
  }

  stepComplete(tMs: number, stepId: string): Envelope {
    return this.envelope("sensor_frame", tMs, {
      t_ms: tMs,
      app_event: { name: "step_completed", step_id: stepId },
    });
  }

  /** A short dwell on one AOI: samples at its center, 10 ms apart by default. */
  gazeBurst(tMs: number, aoi: AoiEntry, options: GazeBurstOptions = {}): Envelope {
    const samples = options.samples ?? 30;
    const periodMs = options.periodMs ?? 10;
    const start = tMs - (samples - 1) * periodMs;
    const gaze = [];
    for (let i = 0; i < samples; i++) {
      gaze.push({ t_ms: start + i * periodMs, point_m: [...aoi.centerM] });
    }
    return this.envelope("sensor_frame", tMs, { t_ms: tMs, gaze });
  }

  heartRate(tMs: number, bpm: number, jitterPct: number, count = 8): Envelope {
    return this.envelope("sensor_frame", tMs, {
      t_ms: tMs,
      rr: synthesizeRr(bpm, jitterPct, count),
    });
  }

  emptyFrame(tMs: number): Envelope {
    return this.envelope("sensor_frame", tMs, { t_ms: tMs });
  }
}
