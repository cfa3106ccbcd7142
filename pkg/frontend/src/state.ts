/**
 * Client-side session state: mirrors the server phase machine, never holds
 * truth labels, and keeps unsubmitted answer drafts in durable storage so a
 * half-hour survey survives an accidental reload.
 */
import { SurveyApi } from "./api.js";
import {
  CRITERIA,
  type Choice,
  type Criterion,
  type NextCase,
  type Phase,
  type ResponsePayload,
  type SessionSummary,
} from "./schema.js";

export interface Draft {
  choice: Choice | null;
  confidence: number | null;
  criteria: Partial<Record<Criterion, { selected: boolean; importance: number }>>;
}

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

/** In-memory stand-in used in tests and when localStorage is unavailable. */
export class MemoryStore implements KeyValueStore {
  private data = new Map<string, string>();
  getItem(key: string): string | null {
    return this.data.has(key) ? (this.data.get(key) as string) : null;
  }
  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
  removeItem(key: string): void {
    this.data.delete(key);
  }
}

export function emptyDraft(): Draft {
  return { choice: null, confidence: null, criteria: {} };
}

export class DraftStore {
  constructor(private readonly store: KeyValueStore) {}

  private key(sessionId: string, caseId: string, phase: Phase): string {
    return `survey-draft:${sessionId}:${caseId}:${phase}`;
  }

  load(sessionId: string, caseId: string, phase: Phase): Draft {
    const raw = this.store.getItem(this.key(sessionId, caseId, phase));
    if (!raw) return emptyDraft();
    try {
      return JSON.parse(raw) as Draft;
    } catch {
      return emptyDraft();
    }
  }

  save(sessionId: string, caseId: string, phase: Phase, draft: Draft): void {
    this.store.setItem(this.key(sessionId, caseId, phase), JSON.stringify(draft));
  }

  clear(sessionId: string, caseId: string, phase: Phase): void {
    this.store.removeItem(this.key(sessionId, caseId, phase));
  }
}

export class IncompleteDraftError extends Error {}

/** Turn a finished draft into the wire payload, refusing partial answers. */
export function draftToPayload(caseId: string, phase: Phase, draft: Draft): ResponsePayload {
  if (draft.choice === null) {
    throw new IncompleteDraftError("choose one of the four authorship options");
  }
  if (draft.confidence === null) {
    throw new IncompleteDraftError("rate your confidence (1-5)");
  }
  return {
    case_id: caseId,
    phase,
    choice: draft.choice,
    confidence: draft.confidence,
    criteria: CRITERIA.map((criterion) => ({
      criterion,
      selected: draft.criteria[criterion]?.selected ?? false,
      importance: draft.criteria[criterion]?.importance ?? 1,
    })),
  };
}

export interface UiSurveyState {
  session: SessionSummary | null;
  current: NextCase | null;
  images: Record<string, string[]>;
  finished: boolean;
}

/**
 * Drives one session end to end. The server remains the source of truth;
 * after every mutation the controller refetches what to show next.
 */
export class SurveyController {
  readonly state: UiSurveyState = { session: null, current: null, images: {}, finished: false };

  constructor(
    private readonly api: SurveyApi,
    private readonly drafts: DraftStore,
  ) {}

  async start(raterRole: string): Promise<void> {
    this.state.session = await this.api.createSession(raterRole);
    await this.advance();
  }

  get sessionId(): string {
    if (!this.state.session) throw new Error("session not started");
    return this.state.session.session_id;
  }

  async advance(): Promise<void> {
    const next = await this.api.nextCase(this.sessionId);
    this.state.current = next;
    if (next === null) {
      const summary = await this.api.sessionSummary(this.sessionId);
      this.state.session = summary;
      if (summary.state === "open") {
        // pre-image answers are all in: unlock the image phase
        this.state.images = await this.api.revealImages(this.sessionId);
        this.state.session = await this.api.sessionSummary(this.sessionId);
        await this.advance();
        return;
      }
      this.state.finished = summary.state === "closed";
    }
  }

  draftFor(caseId: string, phase: Phase): Draft {
    return this.drafts.load(this.sessionId, caseId, phase);
  }

  saveDraft(caseId: string, phase: Phase, draft: Draft): void {
    this.drafts.save(this.sessionId, caseId, phase, draft);
  }

  /** Submit the stored draft for the current case, then move on. */
  async submitCurrent(): Promise<void> {
    const current = this.state.current;
    if (!current) throw new Error("nothing to submit");
    const draft = this.drafts.load(this.sessionId, current.case_id, current.phase);
    const payload = draftToPayload(current.case_id, current.phase, draft);
    await this.api.submitResponse(this.sessionId, payload);
    this.drafts.clear(this.sessionId, current.case_id, current.phase);
    await this.advance();
  }

  async result(): Promise<unknown> {
    if (!this.state.finished) {
      throw new Error("results are only available after the session closes");
    }
    return this.api.sessionResult(this.sessionId);
  }
}
