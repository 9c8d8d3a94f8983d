/** Thin client for the /v1 quiz-service endpoints with idempotent,
 * retry-until-acknowledged response submission. */

import type { QuizPayload, ResponseBody, StudyStatus } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ClientOptions {
  fetchImpl?: FetchLike;
  maxAttempts?: number;
  retryDelayMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class ServiceClient {
  private fetchImpl: FetchLike;
  private maxAttempts: number;
  private retryDelayMs: number;
  private sleep: (ms: number) => Promise<void>;

  constructor(readonly baseUrl: string, options: ClientOptions = {}) {
    this.fetchImpl = options.fetchImpl ?? ((url, init) => fetch(url, init));
    this.maxAttempts = options.maxAttempts ?? 5;
    this.retryDelayMs = options.retryDelayMs ?? 250;
    this.sleep = options.sleep ?? defaultSleep;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      const detail = await response.text();
      throw new Error(`${init?.method ?? "GET"} ${path} -> ${response.status}: ${detail}`);
    }
    return (await response.json()) as T;
  }

  createStudy(body: Record<string, unknown>): Promise<{ study_id: string }> {
    return this.json("/v1/studies", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getStatus(studyId: string): Promise<StudyStatus> {
    return this.json(`/v1/studies/${studyId}`);
  }

  async createSession(studyId: string, participant: string): Promise<string> {
    const out = await this.json<{ session_id: string }>(`/v1/studies/${studyId}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ participant }),
    });
    return out.session_id;
  }

  getQuiz(studyId: string, sessionId: string): Promise<QuizPayload> {
    return this.json(`/v1/studies/${studyId}/quiz?session=${encodeURIComponent(sessionId)}`);
  }

  /**
   * Submit one answer, retrying until the service acknowledges it. The
   * (session, question) key makes resubmission safe: the service stores the
   * first copy and acks duplicates without a second row.
   */
  async submitResponse(body: ResponseBody): Promise<{ stored: boolean }> {
    let lastError: unknown = null;
    for (let attempt = 0; attempt < this.maxAttempts; attempt++) {
      try {
        return await this.json<{ stored: boolean }>("/v1/responses", {
          method: "POST",
          headers: { "content-type": "application/json" },
          body: JSON.stringify(body),
        });
      } catch (err) {
        lastError = err;
        await this.sleep(this.retryDelayMs * (attempt + 1));
      }
    }
    throw new Error(`submission not acknowledged after ${this.maxAttempts} attempts: ${lastError}`);
  }

  advance(studyId: string, minUsers?: number): Promise<{ iteration: number; status: string }> {
    return this.json(`/v1/studies/${studyId}/advance`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(minUsers === undefined ? {} : { min_users: minUsers }),
    });
  }
}
