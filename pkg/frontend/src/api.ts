/**
 * Typed client for the survey service. All replies are schema-validated;
 * pre-closure payloads are additionally screened for truth leakage.
 */
import {
  assertNoTruthLeak,
  nextOrDoneSchema,
  responsePayloadSchema,
  revealReplySchema,
  sessionSummarySchema,
  submitAckSchema,
  type NextCase,
  type ResponsePayload,
  type SessionSummary,
} from "./schema.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly detail: unknown = null,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class SurveyApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(`network failure talking to ${path}: ${String(err)}`, 0);
    }
    const body: unknown = await response.json().catch(() => null);
    if (!response.ok) {
      const detail =
        body && typeof body === "object" && "detail" in body
          ? (body as { detail: unknown }).detail
          : body;
      throw new ApiError(`${path} failed (${response.status}): ${JSON.stringify(detail)}`, response.status, detail);
    }
    return body;
  }

  async createSession(raterRole: string): Promise<SessionSummary> {
    const body = await this.request("/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ rater_role: raterRole }),
    });
    assertNoTruthLeak(body, "createSession");
    return sessionSummarySchema.parse(body);
  }

  async sessionSummary(sessionId: string): Promise<SessionSummary> {
    const body = await this.request(`/sessions/${sessionId}`);
    assertNoTruthLeak(body, "sessionSummary");
    return sessionSummarySchema.parse(body);
  }

  async nextCase(sessionId: string): Promise<NextCase | null> {
    const body = await this.request(`/sessions/${sessionId}/next`);
    assertNoTruthLeak(body, "nextCase");
    const parsed = nextOrDoneSchema.parse(body);
    return "done" in parsed ? null : parsed;
  }

  async submitResponse(sessionId: string, payload: ResponsePayload): Promise<string> {
    // the client refuses to send anything the wire schema would reject
    const validated = responsePayloadSchema.parse(payload);
    const body = await this.request(`/sessions/${sessionId}/responses`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(validated),
    });
    assertNoTruthLeak(body, "submitResponse");
    return submitAckSchema.parse(body).state;
  }

  async revealImages(sessionId: string): Promise<Record<string, string[]>> {
    const body = await this.request(`/sessions/${sessionId}/reveal`, { method: "POST" });
    assertNoTruthLeak(body, "revealImages");
    return revealReplySchema.parse(body).images;
  }

  /** Truth labels become visible here and only here, after closure. */
  async sessionResult(sessionId: string): Promise<unknown> {
    return this.request(`/sessions/${sessionId}/result`);
  }
}
