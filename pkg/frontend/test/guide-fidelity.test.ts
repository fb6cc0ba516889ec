import { describe, expect, it } from "vitest";

import { N_PETALS, isPaused, lightLocus, renderFlower } from "../src/flower.js";
import { GuideAnimator, phaseLagMs } from "../src/guide.js";
import { SseParser } from "../src/stream.js";
import type { GuideFrameView } from "../src/types.js";

/** Frames exactly as the service emits them: a Gaussian bump whose center
 * travels center->tip over the first half cycle. */
function frameAt(phase: number, brBpm = 6, nPositions = 8): GuideFrameView {
  const pos =
    phase < 0.5 ? (phase / 0.5) * (nPositions - 1) : ((1 - phase) / 0.5) * (nPositions - 1);
  const intensities = Array.from({ length: nPositions }, (_, i) =>
    Math.exp(-0.5 * ((i - pos) / 0.8) ** 2),
  );
  return { phase, br_bpm: brBpm, direction: phase < 0.5 ? "outward" : "inward", intensities };
}

describe("flower rendering", () => {
  it("phase 0 puts the light at the petal centers on every petal", () => {
    const scene = renderFlower(frameAt(0));
    expect(lightLocus(frameAt(0))).toBe(0);
    const centers = scene.lights.filter((l) => l.position === 0);
    expect(centers).toHaveLength(N_PETALS);
    for (const l of centers) expect(l.brightness).toBeCloseTo(1.0, 6);
  });

  it("light locus moves monotonically outward over the inhale", () => {
    let last = -1;
    for (let phase = 0; phase < 0.5; phase += 0.02) {
      const locus = lightLocus(frameAt(phase));
      expect(locus).toBeGreaterThanOrEqual(last);
      last = locus;
    }
    expect(last).toBe(7);
  });

  it("brightness is a pure function of the intensities", () => {
    const frame = frameAt(0.3);
    const a = renderFlower(frame);
    const b = renderFlower({ ...frame, intensities: [...frame.intensities] });
    expect(a).toEqual(b);
  });

  it("stream gap over a second flips the paused indicator within 2 s", () => {
    expect(isPaused(null, 0)).toBe(true);
    expect(isPaused(1000, 1900)).toBe(false);
    expect(isPaused(1000, 2001)).toBe(true); // flagged 1.001 s after the last frame
  });
});

describe("guide phase fidelity", () => {
  it("rendered phase lags the streamed phase by less than 100 ms", () => {
    const animator = new GuideAnimator();
    const brBpm = 6;
    const framePeriod = 50; // 20 Hz stream
    let streamedPhase = 0;
    for (let t = 0; t <= 10000; t += framePeriod) {
      streamedPhase = (t / 60000) * brBpm % 1;
      animator.onFrame(frameAt(streamedPhase, brBpm), t);
      // check at an arbitrary render instant inside the frame period
      const renderAt = t + 13;
      const reference = ((renderAt / 60000) * brBpm) % 1;
      const rendered = animator.renderedPhase(renderAt)!;
      expect(phaseLagMs(reference, rendered, brBpm)).toBeLessThan(100);
    }
  });

  it("holds the last pose instead of extrapolating through a stream gap", () => {
    const animator = new GuideAnimator();
    animator.onFrame(frameAt(0.2), 1000);
    expect(animator.renderedPhase(5000)).toBe(0.2);
  });
});

describe("stream parsing", () => {
  it("reassembles events across chunk boundaries", () => {
    const parser = new SseParser();
    const wire =
      'event: guide_frame\ndata: {"phase":0.25,"br_bpm":6,"direction":"outward","intensities":[0,1]}\n\n' +
      'event: stimulus\ndata: {"letter":"B","seq_index":0,"position":4}\n\n';
    const events = [...parser.push(wire.slice(0, 37)), ...parser.push(wire.slice(37))];
    expect(events.map((e) => e.name)).toEqual(["guide_frame", "stimulus"]);
    expect((events[0].data as GuideFrameView).phase).toBe(0.25);
  });
});
