/** Flower scene geometry: a pure function from a guide frame to petal light
 * brightness, plus the stream-gap "paused" rule. All drawing code consumes
 * the scene description; nothing here touches the DOM. */

import type { GuideFrameView } from "./types.js";

export const N_PETALS = 6;

export interface PetalLight {
  petal: number;
  position: number; // 0 = center, increasing toward the tip
  brightness: number; // 0..1
}

export interface FlowerScene {
  phase: number;
  direction: "outward" | "inward";
  lights: PetalLight[];
}

/** Every petal shows the same light pattern; brightness comes straight from
 * the frame's per-position intensities. */
export function renderFlower(frame: GuideFrameView): FlowerScene {
  const lights: PetalLight[] = [];
  for (let petal = 0; petal < N_PETALS; petal++) {
    frame.intensities.forEach((brightness, position) => {
      lights.push({ petal, position, brightness });
    });
  }
  return { phase: frame.phase, direction: frame.direction, lights };
}

/** Index of the brightest light position (the locus of the moving bump). */
export function lightLocus(frame: GuideFrameView): number {
  let best = 0;
  frame.intensities.forEach((v, i) => {
    if (v > frame.intensities[best]) best = i;
  });
  return best;
}

export const STREAM_GAP_PAUSE_MS = 1000;

/** Paused indicator: no frame for more than a second means the stream is
 * considered gone and the animation must stop advancing. */
export function isPaused(lastFrameAtMs: number | null, nowMs: number): boolean {
  if (lastFrameAtMs === null) return true;
  return nowMs - lastFrameAtMs > STREAM_GAP_PAUSE_MS;
}
