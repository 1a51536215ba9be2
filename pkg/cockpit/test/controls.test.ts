import { describe, expect, it } from "vitest";

import { DEFAULT_AOIS, FrameBuilder, synthesizeRr } from "../src/controls.js";
import { makeValidator } from "./helpers.js";

const validator = makeValidator();

describe("synthesizeRr", () => {
  it("maps bpm to 60000/bpm with alternating jitter", () => {
    const rr = synthesizeRr(75, 5, 4);
    expect(rr).toHaveLength(4);
    expect(rr[0]).toBeCloseTo(840, 6); // 800 + 5%
    expect(rr[1]).toBeCloseTo(760, 6); // 800 - 5%
    expect(rr[2]).toBeCloseTo(840, 6);
    const mean = rr.reduce((a, b) => a + b, 0) / rr.length;
    expect(mean).toBeCloseTo(60000 / 75, 6);
  });

  it("zero jitter gives constant intervals", () => {
    expect(synthesizeRr(60, 0, 3)).toEqual([1000, 1000, 1000]);
  });

  it("rejects non-positive bpm", () => {
    expect(() => synthesizeRr(0, 5, 3)).toThrow();
  });
});

describe("FrameBuilder", () => {
  it("assigns strictly increasing sequence numbers", () => {
    const frames = new FrameBuilder("s1");
    const seqs = [
      frames.sessionControl(0, "open"),
      frames.utterance(100, "hi"),
      frames.emptyFrame(200),
    ].map((e) => e.seq);
    expect(seqs).toEqual([1, 2, 3]);
  });

  it("every control produces a schema-valid envelope", () => {
    const frames = new FrameBuilder("s1");
    const envelopes = [
      frames.sessionControl(0, "open"),
      frames.utterance(1000, "which way is up"),
      frames.stepComplete(2000, "s1"),
      frames.gazeBurst(3000, DEFAULT_AOIS[0]),
      frames.heartRate(4000, 72, 3),
      frames.emptyFrame(5000),
    ];
    for (const env of envelopes) {
      expect(validator.checkEnvelope(env)).toEqual([]);
    }
  });

  it("gaze burst samples sit at the AOI center within the frame window", () => {
    const frames = new FrameBuilder("s1");
    const aoi = DEFAULT_AOIS.find((a) => a.aoiId === "tcp")!;
    const env = frames.gazeBurst(5000, aoi, { samples: 20, periodMs: 10 });
    const gaze = env.payload["gaze"] as Array<{ t_ms: number; point_m: number[] }>;
    expect(gaze).toHaveLength(20);
    expect(gaze[gaze.length - 1].t_ms).toBe(5000);
    expect(gaze[0].t_ms).toBe(5000 - 19 * 10);
    for (const sample of gaze) {
      expect(sample.point_m).toEqual([...aoi.centerM]);
    }
  });

  it("heart rate frame carries the synthesized intervals", () => {
    const frames = new FrameBuilder("s1");
    const env = frames.heartRate(1000, 60, 0, 5);
    expect(env.payload["rr"]).toEqual([1000, 1000, 1000, 1000, 1000]);
  });
});
