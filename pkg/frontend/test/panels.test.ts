/** Panel fragments: banner severity, table controls, event order. */

import { describe, expect, it } from "vitest";

import {
  renderBanner,
  renderEventFeed,
  renderPointTable,
} from "../src/panels.js";
import { STALE_AFTER_MS, initialState, reduce } from "../src/state.js";
import { connectedState, frame } from "./fixtures.js";

describe("renderBanner", () => {
  it("walks severity from connecting to live to stale", () => {
    expect(renderBanner(initialState(), 0)).toContain('banner bad');
    let state = connectedState(10);
    state = reduce(state, { type: "frame", at: 1000, frame: frame(11, []) });
    expect(renderBanner(state, 1500)).toContain('banner ok');
    expect(renderBanner(state, 1500)).toContain("tick 11");
    expect(renderBanner(state, 1000 + STALE_AFTER_MS + 1)).toContain(
      'banner warn',
    );
    state = reduce(state, {
      type: "socket-state",
      at: 9000,
      phase: "reconnecting",
      attempt: 3,
    });
    const banner = renderBanner(state, 9001);
    expect(banner).toContain('banner bad');
    expect(banner).toContain("attempt 3");
  });

  it("labels observer mode as read only", () => {
    let state = connectedState(10);
    state = reduce(state, { type: "set-mode", mode: "observer" });
    expect(renderBanner(state, 20)).toContain("read only");
  });
});

describe("renderPointTable", () => {
  it("gives operators buttons on writable discrete points only", () => {
    const html = renderPointTable(connectedState(10));
    expect(html).toContain('data-command="S1.tie.pos"');
    expect(html).toContain('data-command="S2.cb0.pos"');
    expect(html).not.toContain('data-command="S1.bus66.vm"');
  });

  it("hides controls from observers", () => {
    let state = connectedState(10);
    state = reduce(state, { type: "set-mode", mode: "observer" });
    expect(renderPointTable(state)).not.toContain("data-command");
  });

  it("marks rows with an outstanding command and disables them", () => {
    let state = connectedState(10);
    state = reduce(state, {
      type: "command-sent",
      at: 100,
      commandId: 1,
      point: "S1.tie.pos",
      value: false,
    });
    const html = renderPointTable(state);
    expect(html).toContain("cmd pending");
    expect(html).toMatch(/data-command="S1\.tie\.pos"[^>]*disabled/);
    expect(html).not.toMatch(/data-command="S2\.tie\.pos"[^>]*disabled/);
  });

  it("flags bad quality rows", () => {
    let state = connectedState(10);
    const snap = {
      tick: 12,
      points: [...state.points.values()].map((p) => ({
        name: p.name,
        path: p.path,
        writable: p.writable,
        value: p.value,
        quality: p.name === "S1.feederA.i" ? "invalid" : p.quality,
        tick: 12,
      })),
    };
    state = reduce(state, { type: "snapshot", at: 50, response: snap });
    expect(renderPointTable(state)).toContain("bad-quality");
  });
});

describe("renderEventFeed", () => {
  it("lists newest events first with their tick", () => {
    let state = connectedState(10);
    state = reduce(state, {
      type: "frame",
      at: 20,
      frame: frame(11, [{ point: "S1.tie.pos", value: false }]),
    });
    state = reduce(state, {
      type: "frame",
      at: 30,
      frame: frame(12, [{ point: "S1.tie.pos", value: true }]),
    });
    const html = renderEventFeed(state);
    const first = html.indexOf("changed to true");
    const second = html.indexOf("changed to false");
    expect(first).toBeGreaterThan(-1);
    expect(second).toBeGreaterThan(first);
    expect(html).toContain("t12");
  });

  it("escapes markup in event text", () => {
    let state = initialState();
    state = reduce(state, {
      type: "protocol-error",
      at: 5,
      detail: '<script>alert("x")</script>',
    });
    const html = renderEventFeed(state);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});
