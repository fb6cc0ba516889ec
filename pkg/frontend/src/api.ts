/** Thin typed wrapper over the session service HTTP API. The fetch function
 * is injectable so tests can run against a scripted server. */

import type { SessionInfo } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`API error ${status}`);
  }
}

export class SessionApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, err); // unreachable service
    }
    const body = await response.json().catch(() => null);
    if (!response.ok) throw new ApiError(response.status, body);
    return body;
  }

  private post(path: string, payload: unknown): Promise<unknown> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  createSession(participantId: string, condition: string, source?: object): Promise<SessionInfo> {
    return this.post("/sessions", {
      participant_id: participantId,
      condition,
      source: source ?? null,
    }) as Promise<SessionInfo>;
  }

  getSession(id: string): Promise<SessionInfo> {
    return this.request(`/sessions/${id}`) as Promise<SessionInfo>;
  }

  postEvent(id: string, kind: string, payload: object): Promise<SessionInfo> {
    return this.post(`/sessions/${id}/events`, { kind, payload }) as Promise<SessionInfo>;
  }

  advance(id: string): Promise<SessionInfo> {
    return this.post(`/sessions/${id}/advance`, {}) as Promise<SessionInfo>;
  }

  questionnaires(): Promise<Record<string, unknown>> {
    return this.request("/questionnaires") as Promise<Record<string, unknown>>;
  }

  streamUrl(id: string): string {
    return `${this.baseUrl}/sessions/${id}/stream`;
  }
}
