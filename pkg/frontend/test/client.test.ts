/** Client behaviour: startup, reconnect, resync, command I/O. */

import { describe, expect, it } from "vitest";

import { createStore } from "../src/app.js";
import { GatewayClient, backoffDelay } from "../src/client.js";
import type { Store } from "../src/app.js";
import { FakeTransport, flush } from "./fakes.js";
import { frame, makeModel, makeSnapshot } from "./fixtures.js";

async function startConnected(
  transport: FakeTransport,
  store: Store,
): Promise<GatewayClient> {
  const client = new GatewayClient(transport, store.dispatch);
  const started = client.start();
  transport.respond("/model", { status: 200, body: makeModel() });
  await started;
  transport.latestSocket().open();
  transport.respond("/points", { status: 200, body: makeSnapshot(10) });
  await flush();
  return client;
}

describe("startup", () => {
  it("loads the model, opens the stream, then snapshots", async () => {
    const transport = new FakeTransport();
    const store = createStore();
    await startConnected(transport, store);

    const state = store.getState();
    expect(state.model).not.toBeNull();
    expect(state.connection).toBe("live");
    expect(state.points.size).toBe(8);
    expect(transport.fetchLog.map((f) => f.path)).toEqual([
      "/model",
      "/points",
    ]);
  });

  it("holds frames that race the first snapshot", async () => {
    const transport = new FakeTransport();
    const store = createStore();
    const client = new GatewayClient(transport, store.dispatch);
    const started = client.start();
    transport.respond("/model", { status: 200, body: makeModel() });
    await started;

    const socket = transport.latestSocket();
    socket.open();
    // Two frames arrive while GET /points is still in flight.
    socket.message(frame(11, [{ point: "S1.tie.pos", value: false }]));
    socket.message(frame(12, [{ point: "S1.feederA.i", value: 0.2 }]));
    expect(store.getState().points.size).toBe(0);

    transport.respond("/points", { status: 200, body: makeSnapshot(10) });
    await flush();

    const state = store.getState();
    expect(state.points.get("S1.tie.pos")?.value).toBe(false);
    expect(state.points.get("S1.feederA.i")?.value).toBeCloseTo(0.2);
    expect(
      state.events.filter((e) => e.kind === "protocol-error"),
    ).toEqual([]);
  });

  it("reports an invalid model body and still connects", async () => {
    const transport = new FakeTransport();
    const store = createStore();
    const client = new GatewayClient(transport, store.dispatch);
    const started = client.start();
    transport.respond("/model", { status: 200, body: { nope: 1 } });
    await started;

    expect(store.getState().model).toBeNull();
    expect(
      store.getState().events.some((e) => e.kind === "protocol-error"),
    ).toBe(true);
    expect(transport.sockets.length).toBe(1);
  });
});

describe("reconnect", () => {
  it("backs off, reopens, and resynchronizes", async () => {
    const transport = new FakeTransport();
    const store = createStore();
    await startConnected(transport, store);

    transport.latestSocket().fail("network cable pulled");
    expect(store.getState().connection).toBe("reconnecting");
    expect(store.getState().reconnectAttempt).toBe(1);

    transport.advance(backoffDelay(1));
    expect(transport.sockets.length).toBe(2);
    transport.latestSocket().open();
    expect(store.getState().connection).toBe("live");

    // The process moved while the stream was down; only the fresh
    // snapshot can say so, and it must arrive unprompted.
    const moved = makeSnapshot(40);
    const tie = moved.points.find((p) => p.name === "S2.tie.pos");
    if (tie !== undefined) {
      tie.value = false;
    }
    transport.respond("/points", { status: 200, body: moved });
    await flush();

    const state = store.getState();
    expect(state.points.get("S2.tie.pos")?.value).toBe(false);
    expect(state.tick).toBe(40);
    expect(
      state.events.some(
        (e) =>
          e.kind === "uncommanded-change" &&
          e.text.includes("seen after resync"),
      ),
    ).toBe(true);
  });

  it("doubles the delay per attempt up to the cap", async () => {
    expect(backoffDelay(1)).toBe(500);
    expect(backoffDelay(2)).toBe(1000);
    expect(backoffDelay(5)).toBe(8000);
    expect(backoffDelay(6)).toBe(10000);
    expect(backoffDelay(12)).toBe(10000);

    const transport = new FakeTransport();
    const store = createStore();
    await startConnected(transport, store);

    for (let attempt = 1; attempt <= 3; attempt += 1) {
      transport.latestSocket().fail("still down");
      expect(store.getState().reconnectAttempt).toBe(attempt);
      const before = transport.sockets.length;
      transport.advance(backoffDelay(attempt) - 1);
      expect(transport.sockets.length).toBe(before);
      transport.advance(1);
      expect(transport.sockets.length).toBe(before + 1);
    }
  });

  it("stops cleanly: closes the socket and cancels retries", async () => {
    const transport = new FakeTransport();
    const store = createStore();
    const client = await startConnected(transport, store);

    transport.latestSocket().fail("gone");
    client.stop();
    transport.advance(60000);
    expect(transport.sockets.length).toBe(1);
  });
});

describe("commands", () => {
  it("posts the command and routes the ack into state", async () => {
    const transport = new FakeTransport();
    const store = createStore();
    const client = await startConnected(transport, store);

    const sent = client.sendCommand("S1.tie.pos", false, "op7");
    const call = transport.fetchLog[transport.fetchLog.length - 1];
    expect(call?.path).toBe("/points/S1.tie.pos/command");
    expect(call?.init?.method).toBe("POST");
    expect(call?.init?.body).toEqual({ value: false, operator_id: "op7" });

    transport.respond("/points/S1.tie.pos/command", {
      status: 200,
      body: { ok: true, value: false, tick: 12 },
    });
    await sent;

    expect(store.getState().commands[0]?.status).toBe("acked");
    transport.latestSocket().message(
      frame(13, [{ point: "S1.tie.pos", value: false }]),
    );
    expect(store.getState().commands[0]?.status).toBe("confirmed");
  });

  it("surfaces a rejection inline", async () => {
    const transport = new FakeTransport();
    const store = createStore();
    const client = await startConnected(transport, store);

    const sent = client.sendCommand("S1.bus66.vm", true, "op7");
    transport.respond("/points/S1.bus66.vm/command", {
      status: 403,
      body: { error: "NotWritable" },
    });
    await sent;

    expect(store.getState().commands[0]?.status).toBe("rejected");
    expect(store.getState().commands[0]?.detail).toBe("NotWritable");
  });

  it("marks the command failed when the request dies", async () => {
    const transport = new FakeTransport();
    const store = createStore();
    const client = await startConnected(transport, store);

    const sent = client.sendCommand("S1.tie.pos", false, "op7");
    transport.failFetch("/points/S1.tie.pos/command", "connection refused");
    await sent;

    expect(store.getState().commands[0]?.status).toBe("failed");
    expect(store.getState().commands[0]?.detail).toBe("connection refused");
  });
});

describe("stream hygiene", () => {
  it("rejects malformed frames without dying", async () => {
    const transport = new FakeTransport();
    const store = createStore();
    await startConnected(transport, store);

    transport.latestSocket().message("{not json");
    transport.latestSocket().message({ tick: "x", updates: [] });
    transport.latestSocket().message(
      frame(11, [{ point: "S1.feederA.i", value: 0.5 }]),
    );

    const state = store.getState();
    const errors = state.events.filter((e) => e.kind === "protocol-error");
    expect(errors.length).toBe(2);
    expect(state.points.get("S1.feederA.i")?.value).toBeCloseTo(0.5);
  });
});
