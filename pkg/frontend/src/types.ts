/**
 * Shapes shared across the review UI.
 *
 * ItemView deliberately has no field for the correct option: the server never
 * sends one, and the API layer strips unknown fields so a misbehaving backend
 * cannot leak it into client state either.
 */

export interface ItemView {
  item_id: string;
  question: string;
  options: string[];
  gold_lines: string[];
  distractor_lines: string[];
}

export interface ItemPage {
  page: number;
  page_size: number;
  total: number;
  items: ItemView[];
}

export interface ReviewSubmission {
  item_id: string;
  participant_id: string;
  chosen_option: number;
  contradiction_flag: boolean;
}

export interface Metrics {
  average_accuracy: number;
  accuracy_combined: number;
  accuracy_ub: number;
  contradiction_rate_by_confidence: Record<string, number>;
  items_counted: number;
  responses_counted: number;
}

export type Role = "participant" | "owner";
