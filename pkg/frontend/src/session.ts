import { NetworkError, ReviewApi } from "./api.js";
import type { ReviewSubmission } from "./types.js";

interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

interface PersistedState {
  cursor: number;
  submitted: string[];
  queue: ReviewSubmission[];
}

/**
 * Per-participant progress: the cursor only advances after an item was
 * submitted (accepted by the server or queued while offline), and an item
 * can never be submitted twice from this client.
 */
export class Session {
  cursor = 0;
  private submitted = new Set<string>();
  private queue: ReviewSubmission[] = [];

  constructor(
    public readonly participantId: string,
    private storage?: StorageLike,
  ) {
    const saved = this.storage?.getItem(this.storageKey());
    if (saved) {
      const state = JSON.parse(saved) as PersistedState;
      this.cursor = state.cursor;
      this.submitted = new Set(state.submitted);
      this.queue = state.queue;
    }
  }

  private storageKey(): string {
    return `hopforge-review:${this.participantId}`;
  }

  private persist(): void {
    this.storage?.setItem(this.storageKey(), JSON.stringify({
      cursor: this.cursor,
      submitted: [...this.submitted],
      queue: this.queue,
    } satisfies PersistedState));
  }

  hasSubmitted(itemId: string): boolean {
    return this.submitted.has(itemId);
  }

  submittedCount(): number {
    return this.submitted.size;
  }

  pendingCount(): number {
    return this.queue.length;
  }

  /**
   * Submit one item. Returns "accepted" when the server took it, "queued"
   * when the network was down (it will flush later), and throws ApiError on
   * a server-side rejection without advancing.
   */
  async submit(api: ReviewApi, submission: ReviewSubmission): Promise<"accepted" | "queued"> {
    if (this.hasSubmitted(submission.item_id)) {
      throw new Error(`item ${submission.item_id} was already submitted`);
    }
    let outcome: "accepted" | "queued";
    try {
      await api.submit(submission);
      outcome = "accepted";
    } catch (error) {
      if (error instanceof NetworkError) {
        this.queue.push(submission);
        outcome = "queued";
      } else {
        throw error; // validation failure: surface inline, do not advance
      }
    }
    this.submitted.add(submission.item_id);
    this.cursor += 1;
    this.persist();
    return outcome;
  }

  /** Flush queued submissions FIFO; stops at the first network failure. */
  async flushQueue(api: ReviewApi): Promise<number> {
    let flushed = 0;
    while (this.queue.length > 0) {
      const submission = this.queue[0];
      try {
        await api.submit(submission);
      } catch (error) {
        if (error instanceof NetworkError) {
          break;
        }
        // the server refused a queued response; drop it rather than loop
        this.queue.shift();
        this.persist();
        throw error;
      }
      this.queue.shift();
      flushed += 1;
      this.persist();
    }
    return flushed;
  }
}
