/** N-back screen logic: shows each streamed letter for DISPLAY_MS, accepts
 * the first click per onset window, and posts the response with its client
 * latency. The client never scores anything; correctness arrives as server
 * feedback events. */

import type { FeedbackEvent, StimulusView } from "./types.js";

export const DISPLAY_MS = 500;
export const ONSET_INTERVAL_MS = 2000;

export type Button = "left" | "right";

export interface ResponsePost {
  seq_index: number;
  position: number;
  button: Button;
  latency_ms: number;
}

interface Timers {
  setTimeout(fn: () => void, ms: number): unknown;
}

export class NBackScreen {
  current: StimulusView | null = null;
  lastFeedback: FeedbackEvent | null = null;
  private answered = new Set<string>();
  private readonly post: (r: ResponsePost) => void;
  private readonly now: () => number;
  private readonly timers: Timers;

  constructor(post: (r: ResponsePost) => void, now: () => number, timers?: Timers) {
    this.post = post;
    this.now = now;
    this.timers = timers ?? { setTimeout: (fn, ms) => setTimeout(fn, ms) };
  }

  /** A stimulus event from the stream: letter becomes visible immediately
   * and blanks after the display window. */
  onStimulus(letter: string, seqIndex: number, position: number): void {
    const shown: StimulusView = {
      letter,
      seqIndex,
      position,
      onsetMs: this.now(),
      visible: true,
    };
    this.current = shown;
    this.timers.setTimeout(() => {
      if (this.current === shown) this.current = { ...shown, visible: false };
    }, DISPLAY_MS);
  }

  /** Mouse click: left = target, right = non-target. Only the first click in
   * an onset window counts; clicks with no active window are ignored. */
  onClick(button: Button): void {
    if (this.current === null) return;
    const { seqIndex, position, onsetMs } = this.current;
    const latency = this.now() - onsetMs;
    if (latency >= ONSET_INTERVAL_MS) return; // window already over
    const key = `${seqIndex}:${position}`;
    if (this.answered.has(key)) return;
    this.answered.add(key);
    this.post({ seq_index: seqIndex, position, button, latency_ms: latency });
  }

  onFeedback(feedback: FeedbackEvent): void {
    this.lastFeedback = feedback;
  }
}
