import { ApiError, HarnessClient, isNetworkError } from "./api.js";
import { Draft, DraftStore, RankDraft, RateDraft } from "./drafts.js";
import { emptyOrder, isCompleteRanking } from "./rank.js";
import { RankSubmission, RateSubmission, SessionView, TaskView } from "./types.js";

export type SessionState =
  | { phase: "task"; task: TaskView; draft: Draft; error: string | null }
  | { phase: "done" };

export const MESSAGES = {
  partialRanking: "Place every plan in the ranking before continuing.",
  partialLikert: "Please answer every scale for every plan.",
  noPreference: "Please choose the plan you preferred overall.",
  network: "Could not reach the study server. Your answers are kept — try again.",
};

function freshDraft(task: TaskView): Draft {
  if (task.kind === "rank") {
    return { kind: "rank", order: emptyOrder(task.plans.length), freeText: "" };
  }
  return { kind: "rate", likert: {}, preference: null, freeText: "" };
}

function draftFits(draft: Draft, task: TaskView): boolean {
  if (draft.kind !== task.kind) return false;
  if (draft.kind === "rank") return draft.order.length === task.plans.length;
  return true;
}

/**
 * Walks one participant through their session: load task, collect a draft,
 * submit, and advance only once the server acknowledged. Submission is
 * gated on a complete answer; failures keep the draft so a retry (or a
 * page refresh) loses nothing.
 */
export class SessionRunner {
  private state: SessionState = { phase: "done" };

  constructor(
    private readonly client: HarnessClient,
    private readonly drafts: DraftStore,
    readonly session: SessionView,
  ) {}

  current(): SessionState {
    return this.state;
  }

  async start(): Promise<SessionState> {
    if (this.session.completed || this.session.question_count === 0) {
      this.state = { phase: "done" };
      return this.state;
    }
    return this.loadTask(0);
  }

  private async loadTask(index: number): Promise<SessionState> {
    const task = await this.client.fetchTask(this.session.session_id, index);
    const stored = this.drafts.load(index);
    const draft = stored && draftFits(stored, task) ? stored : freshDraft(task);
    this.state = { phase: "task", task, draft, error: null };
    return this.state;
  }

  updateDraft(mutate: (draft: Draft) => Draft): SessionState {
    if (this.state.phase !== "task") return this.state;
    const draft = mutate(this.state.draft);
    this.drafts.save(this.state.task.question_index, draft);
    this.state = { ...this.state, draft, error: null };
    return this.state;
  }

  /** null when the draft is submittable, else the inline message to show. */
  validationMessage(): string | null {
    if (this.state.phase !== "task") return null;
    const { task, draft } = this.state;
    const slots = task.plans.map((p) => p.slot);
    if (draft.kind === "rank") {
      return isCompleteRanking(draft.order, slots) ? null : MESSAGES.partialRanking;
    }
    for (const item of task.likert_items ?? []) {
      const row = draft.likert[item.construct_id] ?? {};
      if (!slots.every((s) => typeof row[s] === "number")) return MESSAGES.partialLikert;
    }
    if (!draft.preference) return MESSAGES.noPreference;
    return null;
  }

  async submit(): Promise<SessionState> {
    if (this.state.phase !== "task") return this.state;
    const blocked = this.validationMessage();
    if (blocked) {
      this.state = { ...this.state, error: blocked };
      return this.state;
    }
    const attempted = this.state;
    const { task, draft } = attempted;
    try {
      const ack =
        draft.kind === "rank"
          ? await this.client.submitRanking(this.session.session_id, rankSubmission(task, draft))
          : await this.client.submitRating(this.session.session_id, rateSubmission(task, draft));
      this.drafts.clear(task.question_index);
      if (ack.completed || task.question_index + 1 >= task.question_count) {
        this.state = { phase: "done" };
        return this.state;
      }
      return await this.loadTask(task.question_index + 1);
    } catch (e) {
      const message = isNetworkError(e)
        ? MESSAGES.network
        : e instanceof ApiError
          ? e.message
          : String(e);
      this.state = { ...attempted, error: message };
      return this.state;
    }
  }
}

export function rankSubmission(task: TaskView, draft: RankDraft): RankSubmission {
  const submission: RankSubmission = {
    question_index: task.question_index,
    ranking: draft.order.map((s) => s as string),
  };
  if (draft.freeText.trim()) submission.free_text = draft.freeText.trim();
  return submission;
}

export function rateSubmission(task: TaskView, draft: RateDraft): RateSubmission {
  const submission: RateSubmission = {
    question_index: task.question_index,
    likert: draft.likert,
    preference: draft.preference as string,
  };
  if (draft.freeText.trim()) submission.free_text = draft.freeText.trim();
  return submission;
}
