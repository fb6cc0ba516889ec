import { describe, expect, it } from "vitest";

import { SessionApi } from "../src/api.js";
import { FormState, groupBySubscale } from "../src/forms.js";
import { Lobby, flowerPlacement, screenForStage } from "../src/lobby.js";
import type { QuestionnaireDef, SessionInfo } from "../src/types.js";

const FOCUS_DYNAMIC_STAGES = [
  "setup",
  "calibration",
  "stai1",
  "nback1",
  "stai2",
  "breathing_exercise",
  "nback2",
  "stai3",
  "use_questionnaire",
];

/** Scripted stand-in for the session service: advances through the plan. */
function fakeService(stages: string[], condition: string) {
  let cursor = 0;
  let completed = false;
  const session = (): SessionInfo => ({
    id: "s1",
    participant_id: "p1",
    condition,
    stages,
    current_stage: completed ? null : stages[cursor],
    completed,
  });
  const step = () => {
    if (cursor + 1 < stages.length) cursor += 1;
    else completed = true;
  };
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    if (url.endsWith("/advance")) step();
    if (url.endsWith("/events")) {
      const body = JSON.parse(String(init?.body));
      if (body.kind === "questionnaire_submitted") step();
      if (body.kind === "calibration_event" && body.payload.action === "accept") step();
    }
    return new Response(JSON.stringify(session()), { status: 200 });
  };
  return new SessionApi("http://test", fetchFn);
}

describe("focus-dynamic lobby flow", () => {
  it("presents calibration, questionnaires, tasks, breathing and usability in order", async () => {
    const lobby = new Lobby(fakeService(FOCUS_DYNAMIC_STAGES, "focus-dynamic"));
    await lobby.createSession("p1", "focus-dynamic");
    expect(lobby.screen).toBe("setup");
    await lobby.advance();
    expect(lobby.screen).toBe("calibration"); // first participant-facing screen
    await lobby.submitEvent("calibration_event", { action: "accept" });

    const seen: string[] = [lobby.screen];
    const submitForm = () =>
      lobby.submitEvent("questionnaire_submitted", { questionnaire: "q", items: [2, 2, 2, 2, 2, 2] });

    expect(lobby.screen).toBe("stai");
    await submitForm();
    seen.push(lobby.screen);
    expect(lobby.screen).toBe("nback");
    await lobby.advance();
    seen.push(lobby.screen);
    expect(lobby.screen).toBe("stai");
    await submitForm();
    seen.push(lobby.screen);
    expect(lobby.screen).toBe("breathing");
    await lobby.advance();
    seen.push(lobby.screen);
    expect(lobby.screen).toBe("nback");
    await lobby.advance();
    seen.push(lobby.screen);
    expect(lobby.screen).toBe("stai");
    await submitForm();
    seen.push(lobby.screen);
    expect(lobby.screen).toBe("use"); // usability form closes the session
    await submitForm();
    expect(lobby.screen).toBe("done");
    expect(seen).toEqual(["stai", "nback", "stai", "breathing", "nback", "stai", "use"]);
  });

  it("keeps the flower peripheral throughout ambient sessions and centered only while breathing in focus ones", () => {
    for (const screen of ["setup", "stai", "nback", "reading"] as const) {
      expect(flowerPlacement("ambient-static", screen)).toBe("peripheral");
    }
    expect(flowerPlacement("focus-static", "breathing")).toBe("center");
    expect(flowerPlacement("focus-static", "nback")).toBe("hidden");
  });

  it("reports an unreachable service as a retryable lobby error", async () => {
    const api = new SessionApi("http://down", async () => {
      throw new Error("connection refused");
    });
    const lobby = new Lobby(api);
    await lobby.createSession("p1", "focus-dynamic");
    expect(lobby.session).toBeNull();
    expect(lobby.error).toBe("service unreachable");
    expect(lobby.screen).toBe("lobby");
  });

  it("maps every stage name to a screen and rejects unknown ones", () => {
    expect(screenForStage("reading_task", false)).toBe("reading");
    expect(screenForStage(null, true)).toBe("done");
    expect(() => screenForStage("intermission", false)).toThrow();
  });
});

const STAI_DEF: QuestionnaireDef = {
  scale: [1, 4],
  anchors_en: ["Not at all", "Somewhat", "Moderately", "Very much"],
  anchors_fr: [],
  items: Array.from({ length: 6 }, (_, i) => ({
    id: `i${i}`,
    text_en: `item ${i}`,
    text_fr: "",
    key: "anxiety_present",
  })),
};

const USE_DEF: QuestionnaireDef = {
  scale: [1, 4],
  anchors_en: [],
  anchors_fr: [],
  items: Array.from({ length: 9 }, (_, i) => ({
    id: `i${i}`,
    text_en: `item ${i}`,
    text_fr: "",
    subscale: ["ease_of_use", "ease_of_learning", "satisfaction"][Math.floor(i / 3)],
  })),
};

describe("questionnaire forms", () => {
  it("enables submission only once all six anxiety items are answered", () => {
    const form = new FormState("stai1", STAI_DEF);
    expect(form.itemCount).toBe(6);
    for (let i = 0; i < 5; i++) form.answer(i, 2);
    expect(form.canSubmit).toBe(false);
    expect(() => form.toPayload()).toThrow();
    form.answer(5, 3);
    expect(form.canSubmit).toBe(true);
    expect(form.toPayload()).toEqual({ questionnaire: "stai1", items: [2, 2, 2, 2, 2, 3] });
  });

  it("renders the usability form as nine items in three labelled subscales", () => {
    const groups = groupBySubscale(USE_DEF);
    expect([...groups.keys()]).toEqual(["ease_of_use", "ease_of_learning", "satisfaction"]);
    for (const indices of groups.values()) expect(indices).toHaveLength(3);
  });

  it("rejects out-of-scale answers", () => {
    const form = new FormState("stai1", STAI_DEF);
    expect(() => form.answer(0, 5)).toThrow();
    expect(() => form.answer(0, 0)).toThrow();
    expect(() => form.answer(9, 2)).toThrow();
  });
});
