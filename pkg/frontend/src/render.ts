import type { ItemView, Metrics, Role } from "./types.js";

export const CONTRADICTION_QUESTION = "Was there any contradicting information?";
export const CONTRADICTION_HINT =
  "Read both the question and the provided sources carefully before selecting " +
  "your answer. If you encounter any contradictions between the two sources that " +
  "make it impossible to answer the question accurately, select \"Yes\". " +
  "Otherwise, select \"No\". Do not select \"Yes\" merely because information " +
  "is missing.";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function sourceBlock(title: string, lines: string[]): HTMLElement {
  const block = el("section", "source");
  block.appendChild(el("h3", "source-title", title));
  const list = el("ul", "source-lines");
  for (const line of lines) {
    list.appendChild(el("li", "source-line", line));
  }
  block.appendChild(list);
  return block;
}

export interface ItemHandlers {
  onChoose(optionIndex: number): void;
  onToggleContradiction(flagged: boolean): void;
  onSubmit(): void;
}

export interface ItemSelection {
  choice: number | null;
  contradiction: boolean;
  error?: string;
}

/** One item per screen: question, both sources, options, contradiction toggle. */
export function renderItem(
  item: ItemView, selection: ItemSelection, handlers: ItemHandlers,
): HTMLElement {
  const root = el("article", "item");
  root.dataset.itemId = item.item_id;
  root.appendChild(el("h2", "question", item.question));
  root.appendChild(sourceBlock("Source A", item.gold_lines));
  root.appendChild(sourceBlock("Source B", item.distractor_lines));

  const options = el("fieldset", "options");
  options.appendChild(el("legend", undefined, "Pick the answer supported by the sources"));
  item.options.forEach((option, index) => {
    const label = el("label", "option");
    const radio = el("input");
    radio.type = "radio";
    radio.name = "answer";
    radio.value = String(index);
    radio.checked = selection.choice === index;
    radio.addEventListener("change", () => handlers.onChoose(index));
    label.appendChild(radio);
    label.appendChild(el("span", undefined, option));
    options.appendChild(label);
  });
  root.appendChild(options);

  const contradiction = el("fieldset", "contradiction");
  contradiction.appendChild(el("legend", undefined, CONTRADICTION_QUESTION));
  contradiction.appendChild(el("p", "hint", CONTRADICTION_HINT));
  for (const [labelText, value] of [["Yes", true], ["No", false]] as const) {
    const label = el("label", "option");
    const radio = el("input");
    radio.type = "radio";
    radio.name = "contradiction";
    radio.value = String(value);
    radio.checked = selection.contradiction === value; // defaults to "No"
    radio.addEventListener("change", () => handlers.onToggleContradiction(value));
    label.appendChild(radio);
    label.appendChild(el("span", undefined, labelText));
    contradiction.appendChild(label);
  }
  root.appendChild(contradiction);

  if (selection.error) {
    root.appendChild(el("p", "inline-error", selection.error));
  }

  const submit = el("button", "submit", "Submit answer");
  submit.disabled = selection.choice === null;
  submit.addEventListener("click", () => handlers.onSubmit());
  root.appendChild(submit);
  return root;
}

export function renderRetryBanner(message: string, onRetry: () => void): HTMLElement {
  const banner = el("div", "retry-banner");
  banner.appendChild(el("span", undefined, message));
  const button = el("button", "retry", "Retry");
  button.addEventListener("click", onRetry);
  banner.appendChild(button);
  return banner;
}

export function renderProgress(submitted: number, total: number, pending: number): HTMLElement {
  const bar = el("div", "progress",
                 `Completed ${submitted} of ${total}`
                 + (pending > 0 ? ` (${pending} queued offline)` : ""));
  return bar;
}

export function renderDone(submitted: number): HTMLElement {
  const done = el("div", "done");
  done.appendChild(el("h2", undefined, "All items reviewed"));
  done.appendChild(el("p", undefined, `You submitted ${submitted} responses. Thank you!`));
  return done;
}

function pct(x: number): string {
  return `${(100 * x).toFixed(1)}%`;
}

/** Owner-only metrics panel; participants see only their completion count. */
export function renderMetrics(metrics: Metrics | null, role: Role, stale = false): HTMLElement {
  const panel = el("section", "metrics");
  if (role !== "owner") {
    panel.classList.add("hidden");
    return panel;
  }
  panel.appendChild(el("h3", undefined, "Study metrics"));
  if (stale) {
    panel.appendChild(el("p", "stale-badge", "stale: metrics endpoint unreachable"));
  }
  if (metrics === null || metrics.responses_counted === 0) {
    panel.appendChild(el("p", "no-data", "no data"));
    return panel;
  }
  const rows: [string, string][] = [
    ["Average accuracy", pct(metrics.average_accuracy)],
    ["Accuracy (combined)", pct(metrics.accuracy_combined)],
    ["Accuracy (upper bound)", pct(metrics.accuracy_ub)],
  ];
  const table = el("dl", "metric-rows");
  for (const [name, value] of rows) {
    table.appendChild(el("dt", undefined, name));
    table.appendChild(el("dd", undefined, value));
  }
  panel.appendChild(table);
  const contradictions = Object.entries(metrics.contradiction_rate_by_confidence)
    .map(([level, count]) => `${level}: ${count}`)
    .join(", ");
  panel.appendChild(el("p", "contradictions", `Items flagged contradictory (${contradictions})`));
  return panel;
}
