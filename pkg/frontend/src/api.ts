import type { ItemPage, ItemView, Metrics, ReviewSubmission } from "./types.js";

/** Server rejected the request (4xx); carries the status and detail text. */
export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(`request failed (${status}): ${detail}`);
  }
}

/** Could not reach the server at all; submissions should be queued. */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(`network unreachable: ${String(cause)}`);
  }
}

/** Keep exactly the ItemView fields; anything else from the wire is dropped. */
export function sanitizeItem(raw: Record<string, unknown>): ItemView {
  return {
    item_id: String(raw.item_id),
    question: String(raw.question),
    options: (raw.options as string[]).map(String),
    gold_lines: ((raw.gold_lines as string[]) ?? []).map(String),
    distractor_lines: ((raw.distractor_lines as string[]) ?? []).map(String),
  };
}

export class ReviewApi {
  constructor(
    private baseUrl: string,
    private fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (cause) {
      throw new NetworkError(cause);
    }
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return response;
  }

  async listItems(page = 1, pageSize = 100): Promise<ItemPage> {
    const response = await this.request(`/items?page=${page}&page_size=${pageSize}`);
    const payload = await response.json();
    return {
      page: payload.page,
      page_size: payload.page_size,
      total: payload.total,
      items: payload.items.map(sanitizeItem),
    };
  }

  async allItems(): Promise<ItemView[]> {
    const items: ItemView[] = [];
    let page = 1;
    for (;;) {
      const chunk = await this.listItems(page);
      items.push(...chunk.items);
      if (items.length >= chunk.total || chunk.items.length === 0) {
        return items;
      }
      page += 1;
    }
  }

  async getItem(itemId: string): Promise<ItemView> {
    const response = await this.request(`/items/${encodeURIComponent(itemId)}`);
    return sanitizeItem(await response.json());
  }

  async submit(submission: ReviewSubmission): Promise<void> {
    await this.request("/responses", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(submission),
    });
  }

  async metrics(): Promise<Metrics> {
    const response = await this.request("/metrics");
    return (await response.json()) as Metrics;
  }
}
