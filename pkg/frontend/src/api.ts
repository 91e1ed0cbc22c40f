import {
  RankSubmission,
  RankSubmissionSchema,
  RateSubmission,
  RateSubmissionSchema,
  SessionView,
  SessionViewSchema,
  SubmitAck,
  SubmitAckSchema,
  TaskView,
  TaskViewSchema,
} from "./types.js";

export class ApiError extends Error {
  constructor(message: string, readonly status: number | null = null) {
    super(message);
    this.name = "ApiError";
  }
}

/** true for DNS/socket-level failures where a retry is worth offering */
export function isNetworkError(err: unknown): boolean {
  return err instanceof ApiError && err.status === null;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class HarnessClient {
  private readonly base: string;

  constructor(base: string, private readonly fetchFn: FetchLike = fetch) {
    this.base = base.replace(/\/+$/, "");
  }

  clipUrl(path: string): string {
    return path.startsWith("http") ? path : this.base + path;
  }

  async createSession(studyId: string, participantId: string): Promise<SessionView> {
    const body = await this.request("POST", "/api/session", {
      study_id: studyId,
      participant_id: participantId,
    });
    return SessionViewSchema.parse(body);
  }

  async fetchTask(sessionId: string, index: number): Promise<TaskView> {
    const path = `/api/session/${encodeURIComponent(sessionId)}/task/${index}`;
    return TaskViewSchema.parse(await this.request("GET", path));
  }

  async submitRanking(sessionId: string, submission: RankSubmission): Promise<SubmitAck> {
    return this.submit(sessionId, RankSubmissionSchema.parse(submission));
  }

  async submitRating(sessionId: string, submission: RateSubmission): Promise<SubmitAck> {
    return this.submit(sessionId, RateSubmissionSchema.parse(submission));
  }

  private async submit(sessionId: string, payload: unknown): Promise<SubmitAck> {
    const path = `/api/session/${encodeURIComponent(sessionId)}/response`;
    return SubmitAckSchema.parse(await this.request("POST", path, payload));
  }

  private async request(method: string, path: string, payload?: unknown): Promise<unknown> {
    let res: Response;
    try {
      res = await this.fetchFn(this.base + path, {
        method,
        headers: payload === undefined ? undefined : { "Content-Type": "application/json" },
        body: payload === undefined ? undefined : JSON.stringify(payload),
      });
    } catch (e) {
      throw new ApiError(`cannot reach the study server: ${e}`, null);
    }
    if (!res.ok) {
      let detail = `HTTP ${res.status}`;
      try {
        const body = await res.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(detail, res.status);
    }
    return res.json();
  }
}
