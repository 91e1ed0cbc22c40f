import { RankOrder } from "./rank.js";

export interface RankDraft {
  kind: "rank";
  order: RankOrder;
  freeText: string;
}

export interface RateDraft {
  kind: "rate";
  // construct -> slot -> 1..7 (missing while unanswered)
  likert: Record<string, Record<string, number>>;
  preference: string | null;
  freeText: string;
}

export type Draft = RankDraft | RateDraft;

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

/**
 * Draft persistence keyed by (session, question) so a refresh mid-task
 * restores exactly where the participant was. Storage is injected:
 * localStorage in the browser, a plain map in tests.
 */
export class DraftStore {
  constructor(private readonly storage: StorageLike, private readonly sessionId: string) {}

  private key(questionIndex: number): string {
    return `scentplan:draft:${this.sessionId}:${questionIndex}`;
  }

  load(questionIndex: number): Draft | null {
    try {
      const raw = this.storage.getItem(this.key(questionIndex));
      if (!raw) return null;
      const parsed = JSON.parse(raw);
      if (parsed?.kind !== "rank" && parsed?.kind !== "rate") return null;
      return parsed as Draft;
    } catch {
      return null; // corrupt or unavailable storage never blocks the task
    }
  }

  save(questionIndex: number, draft: Draft): void {
    try {
      this.storage.setItem(this.key(questionIndex), JSON.stringify(draft));
    } catch {
      // storage full/denied: drafts are a convenience, keep going
    }
  }

  clear(questionIndex: number): void {
    try {
      this.storage.removeItem(this.key(questionIndex));
    } catch {
      // ignore
    }
  }
}

export class MemoryStorage implements StorageLike {
  private map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.has(key) ? this.map.get(key)! : null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
  removeItem(key: string): void {
    this.map.delete(key);
  }
}
