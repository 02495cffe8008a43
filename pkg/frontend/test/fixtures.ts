/**
 * Shared test fixtures: gateway payloads captured from a running
 * service, trimmed to two stations.  Values and shapes are verbatim
 * from the wire, including the case that motivates the explicit
 * switch binding: station two has two tie breakers (S2_TIE12 and
 * S2_TIE23) but only one "S2.tie.pos" point.
 */

import type {
  ModelResponse,
  PointsResponse,
  StreamFrame,
} from "../src/schemas.js";
import type { Action, HmiState } from "../src/state.js";
import { initialState, reduce } from "../src/state.js";

export function makeModel(): ModelResponse {
  return {
    power: {
      layer: "power",
      base_mva: 100.0,
      buses: [
        { id: 0, kv: 66.0, name: "S1/66kV/GenBay/NG" },
        { id: 1, kv: 66.0, name: "S1/66kV/GenBay/N66" },
        { id: 2, kv: 11.0, name: "S1/11kV/MainBay/N11" },
        { id: 3, kv: 66.0, name: "S1/66kV/TieBay12/NT" },
        { id: 4, kv: 66.0, name: "S2/66kV/TieBay12/NT" },
        { id: 5, kv: 11.0, name: "S1/11kV/FeederA/NF" },
        { id: 6, kv: 11.0, name: "S1/11kV/FeederA/NL" },
        { id: 7, kv: 11.0, name: "S1/11kV/FeederB/NF" },
        { id: 8, kv: 11.0, name: "S1/11kV/FeederB/NL" },
        { id: 9, kv: 66.0, name: "S2/66kV/GenBay/NG" },
        { id: 10, kv: 66.0, name: "S2/66kV/GenBay/N66" },
        { id: 11, kv: 11.0, name: "S2/11kV/MainBay/N11" },
        { id: 12, kv: 66.0, name: "S2/66kV/TieBay23/NT" },
        { id: 14, kv: 11.0, name: "S2/11kV/FeederA/NF" },
        { id: 15, kv: 11.0, name: "S2/11kV/FeederA/NL" },
        { id: 16, kv: 11.0, name: "S2/11kV/FeederB/NF" },
        { id: 17, kv: 11.0, name: "S2/11kV/FeederB/NL" },
      ],
      branches: [
        { name: "S1_LNA", kind: "line", from: 2, to: 5 },
        { name: "S1_LNB", kind: "line", from: 2, to: 7 },
        { name: "S1_T1", kind: "transformer", from: 1, to: 2 },
        { name: "S2_LNA", kind: "line", from: 11, to: 14 },
        { name: "S2_LNB", kind: "line", from: 11, to: 16 },
        { name: "S2_T1", kind: "transformer", from: 10, to: 11 },
        { name: "TIELN12", kind: "line", from: 3, to: 4 },
      ],
      switches: [
        { id: "S1_CB0", kind: "CBR", from: 0, to: 1, closed: true },
        { id: "S1_CBA", kind: "CBR", from: 5, to: 6, closed: true },
        { id: "S1_CBB", kind: "CBR", from: 7, to: 8, closed: true },
        { id: "S1_TIE12", kind: "CBR", from: 1, to: 3, closed: true },
        { id: "S2_CB0", kind: "CBR", from: 9, to: 10, closed: true },
        { id: "S2_CBA", kind: "CBR", from: 14, to: 15, closed: true },
        { id: "S2_CBB", kind: "CBR", from: 16, to: 17, closed: true },
        { id: "S2_TIE12", kind: "CBR", from: 10, to: 4, closed: true },
        { id: "S2_TIE23", kind: "CBR", from: 10, to: 12, closed: true },
      ],
      machines: [
        { name: "S1_G0", kind: "generator", bus: 0, slack: true },
        { name: "S1_LA", kind: "load", bus: 6 },
        { name: "S1_LB", kind: "load", bus: 8 },
        { name: "S2_G0", kind: "generator", bus: 9, slack: false },
        { name: "S2_LA", kind: "load", bus: 15 },
        { name: "S2_LB", kind: "load", bus: 17 },
      ],
    },
    cyber: {},
    points: [
      {
        name: "S1.bus66.vm",
        path: "S1_IED1.MMXU1.PhV.phsA.cVal",
        writable: false,
        switch: null,
      },
      {
        name: "S1.cb0.pos",
        path: "S1_IED0.XCBR1.Pos.stVal",
        writable: true,
        switch: "S1_CB0",
      },
      {
        name: "S1.feederA.i",
        path: "S1_IED3.MMXU1.A.phsA.cVal",
        writable: false,
        switch: null,
      },
      {
        name: "S1.tie.pos",
        path: "S1_IED22.XCBR1.Pos.stVal",
        writable: true,
        switch: "S1_TIE12",
      },
      {
        name: "S2.bus66.vm",
        path: "S2_IED2.MMXU1.PhV.phsA.cVal",
        writable: false,
        switch: null,
      },
      {
        name: "S2.cb0.pos",
        path: "S2_IED1.XCBR1.Pos.stVal",
        writable: true,
        switch: "S2_CB0",
      },
      {
        name: "S2.feederA.i",
        path: "S2_IED4.MMXU1.A.phsA.cVal",
        writable: false,
        switch: null,
      },
      {
        name: "S2.tie.pos",
        path: "S2_IED0.XCBR1.Pos.stVal",
        writable: true,
        switch: "S2_TIE12",
      },
    ],
  };
}

export function makeSnapshot(tick = 10): PointsResponse {
  return {
    tick,
    points: [
      {
        name: "S1.bus66.vm",
        path: "S1_IED1.MMXU1.PhV.phsA.cVal",
        writable: false,
        value: 0.9997,
        quality: "good",
        tick,
      },
      {
        name: "S1.cb0.pos",
        path: "S1_IED0.XCBR1.Pos.stVal",
        writable: true,
        value: true,
        quality: "good",
        tick,
      },
      {
        name: "S1.feederA.i",
        path: "S1_IED3.MMXU1.A.phsA.cVal",
        writable: false,
        value: 0.0945,
        quality: "good",
        tick,
      },
      {
        name: "S1.tie.pos",
        path: "S1_IED22.XCBR1.Pos.stVal",
        writable: true,
        value: true,
        quality: "good",
        tick,
      },
      {
        name: "S2.bus66.vm",
        path: "S2_IED2.MMXU1.PhV.phsA.cVal",
        writable: false,
        value: 0.9992,
        quality: "good",
        tick,
      },
      {
        name: "S2.cb0.pos",
        path: "S2_IED1.XCBR1.Pos.stVal",
        writable: true,
        value: true,
        quality: "good",
        tick,
      },
      {
        name: "S2.feederA.i",
        path: "S2_IED4.MMXU1.A.phsA.cVal",
        writable: false,
        value: 0.0949,
        quality: "good",
        tick,
      },
      {
        name: "S2.tie.pos",
        path: "S2_IED0.XCBR1.Pos.stVal",
        writable: true,
        value: true,
        quality: "good",
        tick,
      },
    ],
  };
}

export function frame(
  tick: number,
  updates: { point: string; value: number | boolean | null }[],
): StreamFrame {
  return { tick, updates };
}

/** Reduce a sequence of actions from a fresh state. */
export function runActions(actions: Action[]): HmiState {
  let state = initialState();
  for (const action of actions) {
    state = reduce(state, action);
  }
  return state;
}

/** Connected state with model and first snapshot applied. */
export function connectedState(tick = 10): HmiState {
  return runActions([
    { type: "model-loaded", model: makeModel() },
    { type: "socket-state", at: 0, phase: "live", attempt: 0 },
    { type: "snapshot", at: 1, response: makeSnapshot(tick) },
  ]);
}
