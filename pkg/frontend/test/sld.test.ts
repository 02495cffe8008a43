/** Diagram rendering: glyph truth, determinism, degraded modes. */

import { describe, expect, it } from "vitest";

import { renderSld } from "../src/sld.js";
import { initialState, reduce } from "../src/state.js";
import { connectedState, frame, makeModel } from "./fixtures.js";

/** Extract the rendered open/closed class of one switch glyph. */
function glyphState(svg: string, switchId: string): "open" | "closed" {
  const match = new RegExp(
    `<rect class="sw (closed|open)"[^>]*data-switch="${switchId}"`,
  ).exec(svg);
  if (match === null) {
    throw new Error(`no glyph for ${switchId}`);
  }
  return match[1] as "open" | "closed";
}

describe("renderSld", () => {
  it("renders a placeholder until the model arrives", () => {
    const svg = renderSld(initialState());
    expect(svg).toContain("waiting for model");
  });

  it("draws every switch, bus, and machine in the model", () => {
    const state = connectedState();
    const svg = renderSld(state);
    const model = makeModel();
    for (const sw of model.power.switches) {
      expect(svg).toContain(`data-switch="${sw.id}"`);
    }
    for (const bus of model.power.buses) {
      expect(svg).toContain(`data-bus="${bus.id}"`);
    }
    for (const m of model.power.machines) {
      expect(svg).toContain(`data-machine="${m.name}"`);
    }
    expect(svg).toContain(">S1</text>");
    expect(svg).toContain(">S2</text>");
  });

  it("is byte-identical for identical state", () => {
    const a = renderSld(connectedState());
    const b = renderSld(connectedState());
    expect(a).toBe(b);
  });

  it("tracks streamed breaker values on every commit", () => {
    let state = connectedState(10);
    const script: { tick: number; point: string; value: boolean }[] = [
      { tick: 11, point: "S1.tie.pos", value: false },
      { tick: 12, point: "S2.cb0.pos", value: false },
      { tick: 13, point: "S1.tie.pos", value: true },
      { tick: 14, point: "S2.cb0.pos", value: true },
      { tick: 15, point: "S1.cb0.pos", value: false },
    ];
    const switchOf: Record<string, string> = {
      "S1.tie.pos": "S1_TIE12",
      "S2.cb0.pos": "S2_CB0",
      "S1.cb0.pos": "S1_CB0",
    };
    for (const step of script) {
      state = reduce(state, {
        type: "frame",
        at: step.tick * 10,
        frame: frame(step.tick, [
          { point: step.point, value: step.value },
        ]),
      });
      const svg = renderSld(state);
      const sid = switchOf[step.point] ?? "";
      expect(glyphState(svg, sid)).toBe(step.value ? "closed" : "open");
      expect(svg).toContain(`data-tick="${step.tick}"`);
    }
  });

  it("shows an unbound switch from its static model position", () => {
    let state = connectedState(10);
    state = reduce(state, {
      type: "frame",
      at: 20,
      frame: frame(11, [{ point: "S2.tie.pos", value: false }]),
    });
    const svg = renderSld(state);
    expect(glyphState(svg, "S2_TIE12")).toBe("open");
    expect(glyphState(svg, "S2_TIE23")).toBe("closed");
    const tie23 = /<rect[^>]*data-switch="S2_TIE23"[^>]*>/.exec(svg);
    expect(tie23?.[0]).not.toContain("data-point");
  });

  it("makes an injected trip visible with no operator action", () => {
    // The scenario a defender watches for: telemetry opens a breaker
    // that nobody commanded.  The glyph must flip and the event feed
    // must say so, purely from stream input.
    let state = connectedState(10);
    expect(glyphState(renderSld(state), "S2_TIE12")).toBe("closed");
    state = reduce(state, {
      type: "frame",
      at: 70,
      frame: frame(17, [{ point: "S2.tie.pos", value: false }]),
    });
    const svg = renderSld(state);
    expect(glyphState(svg, "S2_TIE12")).toBe("open");
    expect(state.commands).toEqual([]);
    const feed = state.events.filter((e) => e.kind === "uncommanded-change");
    expect(feed.length).toBe(1);
    expect(feed[0]?.text).toContain("S2.tie.pos");
    expect(feed[0]?.tick).toBe(17);
  });

  it("greys the diagram when marked stale", () => {
    const state = connectedState();
    expect(renderSld(state, { stale: true })).toContain('class="stale"');
    expect(renderSld(state, { stale: false })).not.toContain(
      'class="stale"',
    );
  });
});
