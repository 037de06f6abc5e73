import { ApiError, NetworkError, ReviewApi } from "./api.js";
import {
  renderDone, renderItem, renderMetrics, renderProgress, renderRetryBanner,
} from "./render.js";
import { Session } from "./session.js";
import type { ItemView, Metrics, Role } from "./types.js";

/**
 * The single-item-per-screen controller: loads all items once, walks the
 * session cursor forward on each submission, and periodically flushes the
 * offline queue.
 */
export class App {
  items: ItemView[] = [];
  private choice: number | null = null;
  private contradiction = false;
  private inlineError: string | undefined;

  constructor(
    private api: ReviewApi,
    private session: Session,
    private root: HTMLElement,
    private role: Role = "participant",
  ) {}

  async start(): Promise<void> {
    try {
      this.items = await this.api.allItems();
    } catch (error) {
      this.root.replaceChildren(renderRetryBanner(
        `Could not load review items (${String(error)})`, () => void this.start()));
      return;
    }
    await this.render();
  }

  currentItem(): ItemView | null {
    return this.session.cursor < this.items.length
      ? this.items[this.session.cursor] : null;
  }

  async render(): Promise<void> {
    const children: HTMLElement[] = [
      renderProgress(this.session.submittedCount(), this.items.length,
                     this.session.pendingCount()),
    ];
    const item = this.currentItem();
    if (item === null) {
      children.push(renderDone(this.session.submittedCount()));
    } else {
      children.push(renderItem(
        item,
        { choice: this.choice, contradiction: this.contradiction, error: this.inlineError },
        {
          onChoose: (index) => { this.choice = index; void this.render(); },
          onToggleContradiction: (flag) => { this.contradiction = flag; },
          onSubmit: () => void this.submitCurrent(),
        }));
    }
    children.push(renderMetrics(...await this.fetchMetrics()));
    this.root.replaceChildren(...children);
  }

  private async fetchMetrics(): Promise<[Metrics | null, Role, boolean]> {
    if (this.role !== "owner") {
      return [null, this.role, false];
    }
    try {
      return [await this.api.metrics(), this.role, false];
    } catch {
      return [null, this.role, true];
    }
  }

  async submitCurrent(): Promise<void> {
    const item = this.currentItem();
    if (item === null || this.choice === null) {
      return;
    }
    if (this.session.hasSubmitted(item.item_id)) {
      this.inlineError = "This item was already submitted.";
      await this.render();
      return;
    }
    try {
      await this.session.submit(this.api, {
        item_id: item.item_id,
        participant_id: this.session.participantId,
        chosen_option: this.choice,
        contradiction_flag: this.contradiction,
      });
    } catch (error) {
      this.inlineError = error instanceof ApiError
        ? `The server rejected this response: ${error.message}`
        : String(error);
      await this.render();
      return;
    }
    this.choice = null;
    this.contradiction = false;
    this.inlineError = undefined;
    await this.render();
  }

  /** Called on reconnect (online event or timer); posts queued submissions. */
  async flushOffline(): Promise<number> {
    try {
      const flushed = await this.session.flushQueue(this.api);
      if (flushed > 0) {
        await this.render();
      }
      return flushed;
    } catch (error) {
      if (error instanceof NetworkError) {
        return 0;
      }
      throw error;
    }
  }
}
