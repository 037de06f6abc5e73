import type { ItemView, ReviewSubmission } from "../src/types.js";

export function makeItem(id: string, options = 5): Record<string, unknown> {
  return {
    item_id: id,
    question: `Question for ${id}?`,
    options: Array.from({ length: options }, (_, i) => `option ${i} of ${id}`),
    gold_lines: [`${id}: the gold paragraph line with 3,677 seated`],
    distractor_lines: [`${id}: the distractor line naming 4,500 spectators`],
    // a misbehaving server might leak this; the client must strip it
    gold_option_index: 2,
  };
}

/**
 * An in-memory review server speaking the same HTTP surface as the backend.
 * `offline` makes fetch reject like a dead network; `rejectSubmissions`
 * returns 400 on POST /responses.
 */
export class FakeServer {
  submissions: ReviewSubmission[] = [];
  offline = false;
  rejectSubmissions = false;

  constructor(public rawItems: Record<string, unknown>[]) {}

  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    if (this.offline) {
      throw new TypeError("fetch failed");
    }
    const url = new URL(String(input), "http://testserver");
    if (url.pathname === "/items") {
      const page = Number(url.searchParams.get("page") ?? "1");
      const pageSize = Number(url.searchParams.get("page_size") ?? "100");
      const start = (page - 1) * pageSize;
      return json({
        page, page_size: pageSize, total: this.rawItems.length,
        items: this.rawItems.slice(start, start + pageSize),
      });
    }
    if (url.pathname.startsWith("/items/")) {
      const id = decodeURIComponent(url.pathname.slice("/items/".length));
      const item = this.rawItems.find((raw) => raw.item_id === id);
      return item ? json(item) : json({ detail: "unknown item" }, 404);
    }
    if (url.pathname === "/responses") {
      if (this.rejectSubmissions) {
        return json({ detail: "chosen_option must be in range" }, 400);
      }
      this.submissions.push(JSON.parse(String(init?.body)) as ReviewSubmission);
      return json({ status: "ok" }, 201);
    }
    if (url.pathname === "/metrics") {
      return json({
        average_accuracy: 0.706, accuracy_combined: 0.846, accuracy_ub: 0.959,
        contradiction_rate_by_confidence: { "40%": 1, "60%": 0 },
        items_counted: this.rawItems.length,
        responses_counted: this.submissions.length,
      });
    }
    return json({ detail: "not found" }, 404);
  };
}

function json(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function submissionFor(item: ItemView, participant = "p1"): ReviewSubmission {
  return {
    item_id: item.item_id,
    participant_id: participant,
    chosen_option: 0,
    contradiction_flag: false,
  };
}

export class MemoryStorage {
  private data = new Map<string, string>();

  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
}
