import { describe, expect, it } from "vitest";

import { GatewayClient } from "../src/api.js";
import { Controller, createStore } from "../src/controller.js";
import { replay } from "../src/state.js";
import { mockTransport, searchBody } from "./transport.js";
import type { Canned } from "./transport.js";

const BASE = "http://gateway.test";

function setup(queue: Canned[]) {
  const { transport, calls } = mockTransport(queue);
  const store = createStore();
  const controller = new Controller(new GatewayClient(BASE, transport), store);
  return { controller, store, calls };
}

const CHAT_REPLY = {
  assistant: "A grounded answer.",
  route: "chat",
  degraded: false,
  fallback_used: false,
  schema_version: 1,
};

describe("search mode", () => {
  it("runs a search and stores results in order", async () => {
    const { controller, store, calls } = setup([{ body: searchBody(["v2", "v1"]) }]);
    controller.setQuery("volcano at night");
    await controller.submit();
    expect(calls).toHaveLength(1);
    expect(calls[0].body).toEqual({ query: "volcano at night", k: 10 });
    expect(store.getState().results.map((row) => row.videoId)).toEqual(["v2", "v1"]);
    expect(store.getState().pending).toBe(false);
  });

  it("ignores blank queries", async () => {
    const { controller, calls } = setup([]);
    controller.setQuery("   ");
    await controller.submit();
    expect(calls).toHaveLength(0);
  });

  it("does not start a second request while one is in flight", async () => {
    const { controller, calls } = setup([{ body: searchBody(["v1"]) }]);
    controller.setQuery("dogs");
    const first = controller.submit();
    const second = controller.submit(); // pending: must not hit the transport
    await Promise.all([first, second]);
    expect(calls).toHaveLength(1);
  });

  it("turns a gateway error into the banner and keeps old results", async () => {
    const { controller, store } = setup([
      { body: searchBody(["v1"]) },
      { status: 409, body: { code: "EmptyCorpus", message: "nothing ingested", schema_version: 1 } },
    ]);
    controller.setQuery("first");
    await controller.submit();
    controller.setQuery("second");
    await controller.submit();
    const state = store.getState();
    expect(state.error).toBe("EmptyCorpus: nothing ingested");
    expect(state.results.map((row) => row.videoId)).toEqual(["v1"]);
  });
});

describe("agent mode", () => {
  it("creates a session once and reuses it", async () => {
    const { controller, store, calls } = setup([
      { body: { session_id: "web0000", schema_version: 1 } },
      { body: CHAT_REPLY },
      { body: CHAT_REPLY },
    ]);
    controller.setMode("agent");
    controller.setQuery("hello");
    await controller.submit();
    controller.setQuery("again");
    await controller.submit();
    expect(calls.map((call) => call.url)).toEqual([
      `${BASE}/v1/sessions`,
      `${BASE}/v1/sessions/web0000/messages`,
      `${BASE}/v1/sessions/web0000/messages`,
    ]);
    expect(store.getState().sessionId).toBe("web0000");
  });

  it("carries the selected ids in the message body", async () => {
    const searchReply = {
      assistant: "Found 3 videos.",
      route: "search",
      degraded: false,
      fallback_used: false,
      videos: (searchBody(["vid-a", "vid-b", "vid-c"]) as { results: unknown[] }).results,
      schema_version: 1,
    };
    const { controller, store, calls } = setup([
      { body: { session_id: "web0000", schema_version: 1 } },
      { body: searchReply },
      { body: CHAT_REPLY },
    ]);
    controller.setMode("agent");
    controller.setQuery("find things");
    await controller.submit();
    controller.toggleSelection("vid-a");
    controller.toggleSelection("vid-c");
    controller.setQuery("tell me about these two");
    await controller.submit();

    expect(calls[2].body).toEqual({
      text: "tell me about these two",
      selected_video_ids: ["vid-a", "vid-c"],
    });
    const transcript = store.getState().transcript;
    expect(transcript[transcript.length - 1]).toEqual({
      role: "assistant",
      text: "A grounded answer.",
    });
  });

  it("omits the selection key when nothing is ticked", async () => {
    const { controller, calls } = setup([
      { body: { session_id: "web0000", schema_version: 1 } },
      { body: CHAT_REPLY },
    ]);
    controller.setMode("agent");
    controller.setQuery("just chatting");
    await controller.submit();
    expect(calls[1].body).toEqual({ text: "just chatting" });
  });

  it("chat replies without videos leave the result list alone", async () => {
    const { controller, store } = setup([
      { body: { session_id: "web0000", schema_version: 1 } },
      { body: CHAT_REPLY },
    ]);
    controller.setMode("agent");
    controller.setQuery("hello there");
    await controller.submit();
    expect(store.getState().results).toEqual([]);
    expect(store.getState().transcript.map((line) => line.role)).toEqual(["user", "assistant"]);
  });

  it("keeps the user line and banners the failure when the send fails", async () => {
    const { controller, store } = setup([
      { body: { session_id: "web0000", schema_version: 1 } },
      { status: 400, body: { code: "UnknownVideoSelected", message: "not in results", schema_version: 1 } },
    ]);
    controller.setMode("agent");
    controller.setQuery("pick the wrong one");
    await controller.submit();
    const state = store.getState();
    expect(state.error).toBe("UnknownVideoSelected: not in results");
    expect(state.transcript).toEqual([{ role: "user", text: "pick the wrong one" }]);
    expect(state.pending).toBe(false);
  });

  it("the store's event log replays to the same state", async () => {
    const { controller, store } = setup([
      { body: { session_id: "web0000", schema_version: 1 } },
      { body: CHAT_REPLY },
    ]);
    controller.setMode("agent");
    controller.setQuery("hello");
    await controller.submit();
    expect(replay(store.log)).toEqual(store.getState());
  });
});
