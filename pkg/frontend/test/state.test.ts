/** Reducer behaviour: snapshots, frames, commands, staleness. */

import { describe, expect, it } from "vitest";

import {
  STALE_AFTER_MS,
  initialState,
  isStale,
  reduce,
  switchPositions,
  writablePoints,
} from "../src/state.js";
import type { HmiState } from "../src/state.js";
import { connectedState, frame, makeModel, makeSnapshot } from "./fixtures.js";

describe("snapshot handling", () => {
  it("populates points and advances the tick", () => {
    const state = connectedState(10);
    expect(state.points.size).toBe(8);
    expect(state.tick).toBe(10);
    expect(state.points.get("S1.tie.pos")?.value).toBe(true);
    expect(state.points.get("S1.bus66.vm")?.value).toBeCloseTo(0.9997);
    expect(writablePoints(state)).toEqual([
      "S1.cb0.pos",
      "S1.tie.pos",
      "S2.cb0.pos",
      "S2.tie.pos",
    ]);
  });

  it("reports quality transitions as events", () => {
    let state = connectedState(10);
    const degraded = makeSnapshot(12);
    const row = degraded.points.find((p) => p.name === "S1.bus66.vm");
    if (row !== undefined) {
      row.quality = "invalid";
    }
    state = reduce(state, { type: "snapshot", at: 50, response: degraded });
    expect(state.points.get("S1.bus66.vm")?.quality).toBe("invalid");
    const texts = state.events.map((e) => e.text);
    expect(texts.some((t) => t.includes("quality good -> invalid"))).toBe(
      true,
    );
  });

  it("flags discrete changes discovered by a resync snapshot", () => {
    let state = connectedState(10);
    const later = makeSnapshot(40);
    const row = later.points.find((p) => p.name === "S2.tie.pos");
    if (row !== undefined) {
      row.value = false;
    }
    state = reduce(state, { type: "snapshot", at: 90, response: later });
    expect(state.points.get("S2.tie.pos")?.value).toBe(false);
    const feed = state.events.filter((e) => e.kind === "uncommanded-change");
    expect(feed.length).toBe(1);
    expect(feed[0]?.text).toContain("seen after resync");
  });
});

describe("stream frames", () => {
  it("applies newer frames and ignores replays", () => {
    let state = connectedState(10);
    state = reduce(state, {
      type: "frame",
      at: 20,
      frame: frame(11, [{ point: "S1.feederA.i", value: 0.101 }]),
    });
    expect(state.points.get("S1.feederA.i")?.value).toBeCloseTo(0.101);
    expect(state.tick).toBe(11);

    const replay = reduce(state, {
      type: "frame",
      at: 30,
      frame: frame(11, [{ point: "S1.feederA.i", value: 0.555 }]),
    });
    expect(replay.points.get("S1.feederA.i")?.value).toBeCloseTo(0.101);
    expect(replay.lastMessageAt).toBe(30);
  });

  it("drops frames the snapshot already covers", () => {
    let state = connectedState(10);
    state = reduce(state, {
      type: "frame",
      at: 20,
      frame: frame(9, [{ point: "S1.tie.pos", value: false }]),
    });
    expect(state.points.get("S1.tie.pos")?.value).toBe(true);
  });

  it("turns an update for an unknown point into a diagnostic", () => {
    let state = connectedState(10);
    state = reduce(state, {
      type: "frame",
      at: 20,
      frame: frame(11, [{ point: "S9.mystery", value: 1 }]),
    });
    expect(state.points.has("S9.mystery")).toBe(false);
    const kinds = state.events.map((e) => e.kind);
    expect(kinds).toContain("protocol-error");
  });

  it("feeds uncommanded discrete changes but not analog drift", () => {
    let state = connectedState(10);
    state = reduce(state, {
      type: "frame",
      at: 20,
      frame: frame(11, [
        { point: "S1.bus66.vm", value: 0.9812 },
        { point: "S2.tie.pos", value: false },
      ]),
    });
    const uncommanded = state.events.filter(
      (e) => e.kind === "uncommanded-change",
    );
    expect(uncommanded.length).toBe(1);
    expect(uncommanded[0]?.text).toContain("S2.tie.pos");
  });
});

describe("command lifecycle", () => {
  it("confirms through telemetry within the round-trip window", () => {
    let state = connectedState(10);
    state = reduce(state, {
      type: "command-sent",
      at: 100,
      commandId: 1,
      point: "S1.tie.pos",
      value: false,
    });
    expect(state.commands[0]?.status).toBe("sent");

    state = reduce(state, {
      type: "command-result",
      at: 105,
      commandId: 1,
      response: { ok: true, value: false, tick: 12 },
    });
    expect(state.commands[0]?.status).toBe("acked");
    expect(state.commands[0]?.ackTick).toBe(12);

    state = reduce(state, {
      type: "frame",
      at: 130,
      frame: frame(13, [{ point: "S1.tie.pos", value: false }]),
    });
    const cmd = state.commands[0];
    expect(cmd?.status).toBe("confirmed");
    expect(cmd?.confirmTick).toBe(13);
    expect((cmd?.confirmTick ?? 0) - (cmd?.ackTick ?? 0)).toBeLessThanOrEqual(
      2,
    );
    const uncommanded = state.events.filter(
      (e) => e.kind === "uncommanded-change",
    );
    expect(uncommanded).toEqual([]);
  });

  it("settles immediately when commanding the present value", () => {
    let state = connectedState(10);
    state = reduce(state, {
      type: "command-sent",
      at: 100,
      commandId: 1,
      point: "S1.tie.pos",
      value: true,
    });
    state = reduce(state, {
      type: "command-result",
      at: 105,
      commandId: 1,
      response: { ok: true, value: true, tick: 12 },
    });
    expect(state.commands[0]?.status).toBe("confirmed");
    expect(state.commands[0]?.confirmTick).toBe(12);
  });

  it("records rejections with the gateway's reason", () => {
    let state = connectedState(10);
    state = reduce(state, {
      type: "command-sent",
      at: 100,
      commandId: 1,
      point: "S1.bus66.vm",
      value: false,
    });
    state = reduce(state, {
      type: "command-result",
      at: 105,
      commandId: 1,
      response: { error: "NotWritable" },
    });
    expect(state.commands[0]?.status).toBe("rejected");
    expect(state.commands[0]?.detail).toBe("NotWritable");
    const texts = state.events.map((e) => e.text);
    expect(texts.some((t) => t.includes("NotWritable"))).toBe(true);
  });

  it("records transport failures", () => {
    let state = connectedState(10);
    state = reduce(state, {
      type: "command-sent",
      at: 100,
      commandId: 7,
      point: "S1.tie.pos",
      value: false,
    });
    state = reduce(state, {
      type: "command-failed",
      at: 101,
      commandId: 7,
      detail: "fetch refused",
    });
    expect(state.commands[0]?.status).toBe("failed");
    expect(state.commands[0]?.detail).toBe("fetch refused");
  });
});

describe("staleness", () => {
  it("is stale before any connection and while reconnecting", () => {
    const fresh = initialState();
    expect(isStale(fresh, 0)).toBe(true);
    let state = connectedState(10);
    state = reduce(state, {
      type: "socket-state",
      at: 50,
      phase: "reconnecting",
      attempt: 1,
    });
    expect(isStale(state, 51)).toBe(true);
  });

  it("flips stale when the stream goes quiet too long", () => {
    let state = connectedState(10);
    state = reduce(state, {
      type: "frame",
      at: 1000,
      frame: frame(11, []),
    });
    expect(isStale(state, 1000 + STALE_AFTER_MS - 1)).toBe(false);
    expect(isStale(state, 1000 + STALE_AFTER_MS + 1)).toBe(true);
  });
});

describe("switch positions", () => {
  it("overlays live values on bound switches only", () => {
    let state = connectedState(10);
    state = reduce(state, {
      type: "frame",
      at: 20,
      frame: frame(11, [{ point: "S2.tie.pos", value: false }]),
    });
    const positions = switchPositions(state);
    expect(positions.get("S2_TIE12")).toBe(false);
    expect(positions.get("S2_TIE23")).toBe(true);
    expect(positions.get("S1_CBA")).toBe(true);
  });

  it("falls back to the model's static state without telemetry", () => {
    let state: HmiState = initialState();
    state = reduce(state, { type: "model-loaded", model: makeModel() });
    const positions = switchPositions(state);
    expect(positions.get("S1_TIE12")).toBe(true);
    expect(positions.size).toBe(9);
  });
});
