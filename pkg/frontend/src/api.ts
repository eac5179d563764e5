/** Thin typed client for the session service. */

import type {
  ActionResponse,
  HumanAction,
  NewSessionRequest,
  Rating,
  SessionCreated,
  SessionState,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class SessionApi {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (...args) => globalThis.fetch(...args),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await resp.text();
    let doc: unknown;
    try {
      doc = text ? JSON.parse(text) : {};
    } catch {
      doc = { error: text };
    }
    if (!resp.ok) {
      const message =
        typeof doc === "object" && doc !== null && "error" in doc
          ? String((doc as { error: unknown }).error)
          : `HTTP ${resp.status}`;
      throw new ApiError(resp.status, message);
    }
    return doc as T;
  }

  createSession(request: NewSessionRequest): Promise<SessionCreated> {
    return this.request("POST", "/sessions", request);
  }

  sendAction(sessionId: string, action: HumanAction): Promise<ActionResponse> {
    return this.request("POST", `/sessions/${sessionId}/action`, action);
  }

  getSession(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  submitRating(sessionId: string, rating: Rating): Promise<unknown> {
    return this.request("POST", `/sessions/${sessionId}/rating`, rating);
  }
}
