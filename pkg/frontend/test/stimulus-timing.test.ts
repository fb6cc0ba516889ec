import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { DISPLAY_MS, NBackScreen, ONSET_INTERVAL_MS, type ResponsePost } from "../src/nback.js";

describe("stimulus timing over an instrumented 30-letter sequence", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("shows each letter for 500 ms +/- one 60 Hz frame and spaces onsets 2000 ms +/- 10 ms", () => {
    const posts: ResponsePost[] = [];
    const screen = new NBackScreen((r) => posts.push(r), () => Date.now());
    const letters = "BCDFGHJKLMBCDFGHJKLMBCDFGHJKLM".split("");

    const onsets: number[] = [];
    const visibleDurations: number[] = [];

    letters.forEach((letter, i) => {
      screen.onStimulus(letter, 0, i);
      onsets.push(Date.now());
      expect(screen.current?.visible).toBe(true);
      expect(screen.current?.letter).toBe(letter);

      // step until the letter blanks, in 60 Hz display frames
      const shownAt = Date.now();
      let blankedAt: number | null = null;
      while (Date.now() - shownAt < ONSET_INTERVAL_MS - 17) {
        vi.advanceTimersByTime(1000 / 60);
        if (blankedAt === null && screen.current?.visible === false) {
          blankedAt = Date.now();
        }
      }
      // the next onset arrives from the server on the exact 2000 ms grid
      vi.advanceTimersByTime(ONSET_INTERVAL_MS - (Date.now() - shownAt));
      expect(blankedAt).not.toBeNull();
      visibleDurations.push(blankedAt! - shownAt);
    });

    for (const d of visibleDurations) {
      expect(Math.abs(d - DISPLAY_MS)).toBeLessThanOrEqual(17);
    }
    for (let i = 1; i < onsets.length; i++) {
      expect(Math.abs(onsets[i] - onsets[i - 1] - ONSET_INTERVAL_MS)).toBeLessThanOrEqual(10);
    }
  });

  it("posts the first click per window with its latency and ignores the rest", () => {
    const posts: ResponsePost[] = [];
    const screen = new NBackScreen((r) => posts.push(r), () => Date.now());

    screen.onClick("left"); // no stimulus yet: ignored
    expect(posts).toHaveLength(0);

    screen.onStimulus("B", 0, 2);
    vi.advanceTimersByTime(420);
    screen.onClick("left");
    screen.onClick("right"); // double click: first one counts
    expect(posts).toHaveLength(1);
    expect(posts[0]).toEqual({ seq_index: 0, position: 2, button: "left", latency_ms: 420 });

    // next onset window: a fresh response is allowed again
    vi.advanceTimersByTime(ONSET_INTERVAL_MS - 420);
    screen.onStimulus("C", 0, 3);
    vi.advanceTimersByTime(600); // letter already blank, window still open
    screen.onClick("right");
    expect(posts).toHaveLength(2);
    expect(posts[1].latency_ms).toBe(600);
  });

  it("renders server feedback without computing any score locally", () => {
    const screen = new NBackScreen(() => {}, () => Date.now());
    screen.onFeedback({ seq_index: 0, position: 5, correct: true });
    expect(screen.lastFeedback?.correct).toBe(true);
  });
});
