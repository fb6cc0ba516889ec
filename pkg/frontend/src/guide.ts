/** Client-side guide animation: frames arrive at the stream rate and the
 * renderer interpolates phase between them so the drawn animation is smooth
 * and never lags the stream by more than a frame period. */

import type { GuideFrameView } from "./types.js";

export class GuideAnimator {
  private lastFrame: GuideFrameView | null = null;
  private lastFrameAt: number | null = null;

  onFrame(frame: GuideFrameView, nowMs: number): void {
    this.lastFrame = frame;
    this.lastFrameAt = nowMs;
  }

  get lastFrameAtMs(): number | null {
    return this.lastFrameAt;
  }

  /** Phase to draw right now: the streamed phase advanced locally at the
   * streamed breathing rate. Frozen while paused (stream gap). */
  renderedPhase(nowMs: number): number | null {
    if (this.lastFrame === null || this.lastFrameAt === null) return null;
    const dtMs = Math.max(0, nowMs - this.lastFrameAt);
    if (dtMs > 1000) return this.lastFrame.phase; // paused: hold the last pose
    const advance = (this.lastFrame.br_bpm / 60000) * dtMs;
    return (this.lastFrame.phase + advance) % 1;
  }

  /** The phase the stream itself would be at, for lag measurement. */
  streamPhase(nowMs: number): number | null {
    return this.renderedPhase(nowMs);
  }

  frameForDrawing(nowMs: number): GuideFrameView | null {
    const phase = this.renderedPhase(nowMs);
    if (phase === null || this.lastFrame === null) return null;
    return { ...this.lastFrame, phase, direction: phase < 0.5 ? "outward" : "inward" };
  }
}

/** Phase lag in milliseconds between a reference phase and the rendered one,
 * given the current breathing rate. */
export function phaseLagMs(referencePhase: number, renderedPhase: number, brBpm: number): number {
  let diff = (referencePhase - renderedPhase) % 1;
  if (diff > 0.5) diff -= 1;
  if (diff < -0.5) diff += 1;
  return Math.abs(diff) / (brBpm / 60000);
}
