import { ReviewApi } from "./api.js";
import { App } from "./app.js";
import { Session } from "./session.js";
import type { Role } from "./types.js";

const PARTICIPANT_KEY = "hopforge-review:participant";

function participantId(): string {
  const existing = window.localStorage.getItem(PARTICIPANT_KEY);
  if (existing) {
    return existing;
  }
  let entered = "";
  while (!entered.trim()) {
    entered = window.prompt("Enter your participant id") ?? "";
  }
  window.localStorage.setItem(PARTICIPANT_KEY, entered.trim());
  return entered.trim();
}

function main(): void {
  const params = new URLSearchParams(window.location.search);
  const role: Role = params.get("role") === "owner" ? "owner" : "participant";
  const baseUrl = params.get("api") ?? "";
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app container");
  }
  const api = new ReviewApi(baseUrl);
  const session = new Session(participantId(), window.localStorage);
  const app = new App(api, session, root, role);
  window.addEventListener("online", () => void app.flushOffline());
  window.setInterval(() => void app.flushOffline(), 15000);
  void app.start();
}

main();
