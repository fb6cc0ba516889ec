/** Experimenter lobby: create a session, follow stage progress, advance
 * untimed stages. Screen selection is a pure function of the session state
 * so the flow is testable without a DOM. */

import { ApiError, SessionApi } from "./api.js";
import type { SessionInfo } from "./types.js";

export type Screen =
  | "lobby"
  | "setup"
  | "calibration"
  | "stai"
  | "nback"
  | "breathing"
  | "reading"
  | "use"
  | "done";

export function screenForStage(stageName: string | null, completed: boolean): Screen {
  if (completed) return "done";
  if (stageName === null) return "lobby";
  if (stageName.startsWith("stai")) return "stai";
  if (stageName.startsWith("nback")) return "nback";
  switch (stageName) {
    case "setup":
      return "setup";
    case "calibration":
      return "calibration";
    case "breathing_exercise":
      return "breathing";
    case "reading_task":
      return "reading";
    case "use_questionnaire":
      return "use";
    default:
      throw new Error(`unknown stage ${stageName}`);
  }
}

/** The ambient conditions keep a small flower widget at the screen periphery
 * for the whole session; the focus conditions show it full-screen only
 * during the breathing exercise. */
export function flowerPlacement(condition: string, screen: Screen): "hidden" | "peripheral" | "center" {
  const ambient = condition.startsWith("ambient");
  if (ambient) return "peripheral";
  return screen === "breathing" || screen === "calibration" ? "center" : "hidden";
}

export class Lobby {
  session: SessionInfo | null = null;
  error: string | null = null;

  constructor(private readonly api: SessionApi) {}

  get screen(): Screen {
    if (this.session === null) return "lobby";
    return screenForStage(this.session.current_stage, this.session.completed);
  }

  async createSession(participantId: string, condition: string, source?: object): Promise<void> {
    try {
      this.session = await this.api.createSession(participantId, condition, source);
      this.error = null;
    } catch (err) {
      // unreachable service or rejected request: stay in the lobby with a retry prompt
      this.error = err instanceof ApiError && err.status === 0 ? "service unreachable" : String(err);
    }
  }

  async refresh(): Promise<void> {
    if (this.session) this.session = await this.api.getSession(this.session.id);
  }

  async advance(): Promise<void> {
    if (this.session) this.session = await this.api.advance(this.session.id);
  }

  async submitEvent(kind: string, payload: object): Promise<void> {
    if (this.session) this.session = await this.api.postEvent(this.session.id, kind, payload);
  }
}
