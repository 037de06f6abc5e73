import { describe, expect, it } from "vitest";

import { ReviewApi } from "../src/api.js";
import { Session } from "../src/session.js";
import { FakeServer, MemoryStorage, makeItem } from "./helpers.js";

function setup(raw = [makeItem("a"), makeItem("b")]) {
  const server = new FakeServer(raw);
  const api = new ReviewApi("", server.fetch);
  return { server, api };
}

function sub(itemId: string) {
  return { item_id: itemId, participant_id: "p1", chosen_option: 0,
           contradiction_flag: false };
}

describe("Session", () => {
  it("advances the cursor only after a submission", async () => {
    const { api } = setup();
    const session = new Session("p1");
    expect(session.cursor).toBe(0);
    const outcome = await session.submit(api, sub("a"));
    expect(outcome).toBe("accepted");
    expect(session.cursor).toBe(1);
    expect(session.submittedCount()).toBe(1);
  });

  it("rejects a double submit of the same item client-side", async () => {
    const { api, server } = setup();
    const session = new Session("p1");
    await session.submit(api, sub("a"));
    await expect(session.submit(api, sub("a"))).rejects.toThrow("already submitted");
    expect(server.submissions).toHaveLength(1);
    expect(session.cursor).toBe(1);
  });

  it("does not advance when the server rejects the response", async () => {
    const { api, server } = setup();
    server.rejectSubmissions = true;
    const session = new Session("p1");
    await expect(session.submit(api, sub("a"))).rejects.toThrow("400");
    expect(session.cursor).toBe(0);
    expect(session.hasSubmitted("a")).toBe(false);
  });

  it("queues offline submissions and flushes them on reconnect", async () => {
    const { api, server } = setup();
    const session = new Session("p1");
    server.offline = true;
    expect(await session.submit(api, sub("a"))).toBe("queued");
    expect(await session.submit(api, sub("b"))).toBe("queued");
    expect(session.cursor).toBe(2);
    expect(session.pendingCount()).toBe(2);
    expect(server.submissions).toHaveLength(0);

    server.offline = false;
    const flushed = await session.flushQueue(api);
    expect(flushed).toBe(2);
    expect(session.pendingCount()).toBe(0);
    expect(server.submissions.map((s) => s.item_id)).toEqual(["a", "b"]);
  });

  it("stops flushing at the first network failure and keeps the rest", async () => {
    const { api, server } = setup();
    const session = new Session("p1");
    server.offline = true;
    await session.submit(api, sub("a"));
    await session.submit(api, sub("b"));
    const flushed = await session.flushQueue(api); // still offline
    expect(flushed).toBe(0);
    expect(session.pendingCount()).toBe(2);
  });

  it("persists progress and queue across reloads", async () => {
    const storage = new MemoryStorage();
    const { api, server } = setup();
    server.offline = true;
    const first = new Session("p1", storage);
    await first.submit(api, sub("a"));

    const reloaded = new Session("p1", storage);
    expect(reloaded.cursor).toBe(1);
    expect(reloaded.hasSubmitted("a")).toBe(true);
    expect(reloaded.pendingCount()).toBe(1);

    server.offline = false;
    expect(await reloaded.flushQueue(api)).toBe(1);
    expect(server.submissions.map((s) => s.item_id)).toEqual(["a"]);
  });

  it("keeps sessions of different participants separate", async () => {
    const storage = new MemoryStorage();
    const { api } = setup();
    const p1 = new Session("p1", storage);
    await p1.submit(api, sub("a"));
    const p2 = new Session("p2", storage);
    expect(p2.cursor).toBe(0);
    expect(p2.hasSubmitted("a")).toBe(false);
  });
});
