/**
 * Application state and the reducer that advances it.
 *
 * All state transitions are pure: the reducer takes the previous
 * state and one action and returns a new state, never touching the
 * network, the DOM, or the clock.  Timestamps ride in on the actions.
 * That keeps every behaviour testable with plain data and makes a
 * given action sequence produce exactly one result.
 */

import type {
  CommandResponse,
  ModelResponse,
  PointValue,
  PointsResponse,
  StreamFrame,
} from "./schemas.js";

export type ConnectionPhase = "connecting" | "live" | "reconnecting";

/** Observers can look; operators can also issue commands. */
export type OperatorMode = "observer" | "operator";

/** Live record for one SCADA point. */
export interface PointRecord {
  name: string;
  path: string;
  writable: boolean;
  value: PointValue;
  quality: string;
  /** Kernel tick at which the current value was committed. */
  tick: number;
  /** Wall-clock ms when this HMI last saw the value change. */
  changedAt: number | null;
}

export type CommandStatus =
  | "sent"
  | "acked"
  | "confirmed"
  | "rejected"
  | "failed";

/** One operator command and what became of it. */
export interface CommandRecord {
  id: number;
  point: string;
  value: PointValue;
  sentAt: number;
  status: CommandStatus;
  /** Tick the gateway stamped on its acknowledgement. */
  ackTick: number | null;
  /** Tick at which the commanded value showed up in telemetry. */
  confirmTick: number | null;
  /** Error name or transport detail for rejected/failed commands. */
  detail: string | null;
}

export type EventKind =
  | "connection"
  | "command"
  | "uncommanded-change"
  | "quality"
  | "protocol-error";

/** One row of the operator event feed. */
export interface HmiEvent {
  at: number;
  tick: number | null;
  kind: EventKind;
  text: string;
}

export interface HmiState {
  model: ModelResponse | null;
  points: Map<string, PointRecord>;
  /** Newest committed tick seen from any source. */
  tick: number;
  /** Newest stream frame tick, for dropping stale frames. */
  streamTick: number | null;
  /**
   * Newest snapshot tick.  A snapshot at tick S already contains
   * every change committed up to S, so stream frames at or before S
   * are redundant at best and value regressions at worst.
   */
  snapshotTick: number;
  lastMessageAt: number | null;
  connection: ConnectionPhase;
  reconnectAttempt: number;
  mode: OperatorMode;
  commands: CommandRecord[];
  events: HmiEvent[];
}

/** Data considered stale when the stream is silent this long. */
export const STALE_AFTER_MS = 5000;

/** Event feed length cap; older rows fall off. */
export const EVENT_CAP = 200;

/** Command history cap; settled commands beyond this fall off. */
export const COMMAND_CAP = 50;

export function initialState(mode: OperatorMode = "operator"): HmiState {
  return {
    model: null,
    points: new Map(),
    tick: -1,
    streamTick: null,
    snapshotTick: -1,
    lastMessageAt: null,
    connection: "connecting",
    reconnectAttempt: 0,
    mode,
    commands: [],
    events: [],
  };
}

export type Action =
  | { type: "model-loaded"; model: ModelResponse }
  | { type: "snapshot"; at: number; response: PointsResponse }
  | { type: "frame"; at: number; frame: StreamFrame }
  | {
      type: "socket-state";
      at: number;
      phase: ConnectionPhase;
      attempt: number;
      detail?: string;
    }
  | {
      type: "command-sent";
      at: number;
      commandId: number;
      point: string;
      value: PointValue;
    }
  | {
      type: "command-result";
      at: number;
      commandId: number;
      response: CommandResponse;
    }
  | { type: "command-failed"; at: number; commandId: number; detail: string }
  | { type: "protocol-error"; at: number; detail: string }
  | { type: "set-mode"; mode: OperatorMode };

function pushEvent(events: HmiEvent[], event: HmiEvent): HmiEvent[] {
  const next = [...events, event];
  return next.length > EVENT_CAP ? next.slice(next.length - EVENT_CAP) : next;
}

function pruneCommands(commands: CommandRecord[]): CommandRecord[] {
  if (commands.length <= COMMAND_CAP) {
    return commands;
  }
  const settled = new Set<CommandStatus>(["confirmed", "rejected", "failed"]);
  const excess = commands.length - COMMAND_CAP;
  const result: CommandRecord[] = [];
  let dropped = 0;
  for (const cmd of commands) {
    if (dropped < excess && settled.has(cmd.status)) {
      dropped += 1;
      continue;
    }
    result.push(cmd);
  }
  return result;
}

export function formatValue(value: PointValue): string {
  if (value === null) {
    return "n/a";
  }
  return typeof value === "number" ? value.toFixed(4) : String(value);
}

/**
 * Match an observed value change against an outstanding command so
 * commanded changes and uncommanded ones land in different feeds.
 * Returns the command id, or null when nothing explains the change.
 */
function explainingCommand(
  commands: CommandRecord[],
  point: string,
  value: PointValue,
): number | null {
  for (const cmd of commands) {
    if (
      cmd.point === point &&
      cmd.value === value &&
      (cmd.status === "sent" || cmd.status === "acked")
    ) {
      return cmd.id;
    }
  }
  return null;
}

function applyValueChange(
  state: HmiState,
  at: number,
  tick: number,
  name: string,
  value: PointValue,
  source: "stream" | "snapshot",
): HmiState {
  const prev = state.points.get(name);
  if (prev === undefined) {
    // A value for a point the snapshot never introduced: record the
    // anomaly and ignore the value rather than invent a row with
    // unknown writability.
    return {
      ...state,
      events: pushEvent(state.events, {
        at,
        tick,
        kind: "protocol-error",
        text: `update for unknown point ${name}`,
      }),
    };
  }
  if (prev.value === value) {
    return state;
  }
  const points = new Map(state.points);
  points.set(name, { ...prev, value, tick, changedAt: at });
  let { commands, events } = state;
  const cmdId = explainingCommand(commands, name, value);
  if (cmdId !== null) {
    commands = commands.map((cmd) =>
      cmd.id === cmdId
        ? { ...cmd, status: "confirmed" as const, confirmTick: tick }
        : cmd,
    );
    events = pushEvent(events, {
      at,
      tick,
      kind: "command",
      text: `${name} now ${String(value)} (commanded)`,
    });
  } else if (typeof value === "boolean" || typeof prev.value === "boolean") {
    // Discrete points flip rarely and each flip matters; analog
    // telemetry drifts every tick and would flood the feed.
    const suffix = source === "snapshot" ? " (seen after resync)" : "";
    events = pushEvent(events, {
      at,
      tick,
      kind: "uncommanded-change",
      text: `${name} changed to ${String(value)} without a command${suffix}`,
    });
  }
  return { ...state, points, commands, events };
}

function applySnapshot(
  state: HmiState,
  at: number,
  response: PointsResponse,
): HmiState {
  let next: HmiState = {
    ...state,
    tick: Math.max(state.tick, response.tick),
    snapshotTick: Math.max(state.snapshotTick, response.tick),
    lastMessageAt: at,
  };
  const points = new Map(next.points);
  for (const p of response.points) {
    const prev = points.get(p.name);
    if (prev === undefined) {
      points.set(p.name, {
        name: p.name,
        path: p.path,
        writable: p.writable,
        value: p.value,
        quality: p.quality,
        tick: p.tick,
        changedAt: null,
      });
      continue;
    }
    if (prev.quality !== p.quality) {
      next = {
        ...next,
        events: pushEvent(next.events, {
          at,
          tick: response.tick,
          kind: "quality",
          text: `${p.name} quality ${prev.quality} -> ${p.quality}`,
        }),
      };
    }
    points.set(p.name, { ...prev, quality: p.quality });
  }
  next = { ...next, points };
  for (const p of response.points) {
    next = applyValueChange(next, at, p.tick, p.name, p.value, "snapshot");
  }
  return next;
}

function applyFrame(state: HmiState, at: number, frame: StreamFrame): HmiState {
  // The stream can replay after a reconnect, and a frame already in
  // flight when a snapshot lands describes changes the snapshot has.
  // Either way the frame proves the stream is alive but must not
  // touch values.
  const replay = state.streamTick !== null && frame.tick <= state.streamTick;
  if (replay || frame.tick <= state.snapshotTick) {
    return { ...state, lastMessageAt: at };
  }
  let next: HmiState = {
    ...state,
    streamTick: frame.tick,
    tick: Math.max(state.tick, frame.tick),
    lastMessageAt: at,
  };
  for (const update of frame.updates) {
    next = applyValueChange(
      next,
      at,
      frame.tick,
      update.point,
      update.value,
      "stream",
    );
  }
  return next;
}

function applyCommandResult(
  state: HmiState,
  at: number,
  commandId: number,
  response: CommandResponse,
): HmiState {
  const cmd = state.commands.find((c) => c.id === commandId);
  if (cmd === undefined) {
    return state;
  }
  if ("ok" in response) {
    // The gateway acknowledged.  If telemetry already shows the
    // commanded value (a command to the present state changes
    // nothing, so no stream update will ever arrive), settle now.
    const current = state.points.get(cmd.point);
    const alreadyThere =
      current !== undefined && current.value === response.value;
    const status: CommandStatus = alreadyThere ? "confirmed" : "acked";
    return {
      ...state,
      commands: state.commands.map((c) =>
        c.id === commandId
          ? {
              ...c,
              status,
              ackTick: response.tick,
              confirmTick: alreadyThere ? response.tick : null,
            }
          : c,
      ),
      events: pushEvent(state.events, {
        at,
        tick: response.tick,
        kind: "command",
        text: `${cmd.point} <- ${String(cmd.value)} accepted`,
      }),
    };
  }
  return {
    ...state,
    commands: state.commands.map((c) =>
      c.id === commandId
        ? { ...c, status: "rejected" as const, detail: response.error }
        : c,
    ),
    events: pushEvent(state.events, {
      at,
      tick: null,
      kind: "command",
      text: `${cmd.point} <- ${String(cmd.value)} rejected: ${response.error}`,
    }),
  };
}

export function reduce(state: HmiState, action: Action): HmiState {
  switch (action.type) {
    case "model-loaded":
      return { ...state, model: action.model };
    case "snapshot":
      return applySnapshot(state, action.at, action.response);
    case "frame":
      return applyFrame(state, action.at, action.frame);
    case "socket-state": {
      const text =
        action.phase === "live"
          ? "stream connected"
          : action.phase === "reconnecting"
            ? `stream lost, retrying (attempt ${action.attempt})` +
              (action.detail ? `: ${action.detail}` : "")
            : "connecting";
      return {
        ...state,
        connection: action.phase,
        reconnectAttempt: action.attempt,
        events: pushEvent(state.events, {
          at: action.at,
          tick: null,
          kind: "connection",
          text,
        }),
      };
    }
    case "command-sent": {
      const record: CommandRecord = {
        id: action.commandId,
        point: action.point,
        value: action.value,
        sentAt: action.at,
        status: "sent",
        ackTick: null,
        confirmTick: null,
        detail: null,
      };
      return {
        ...state,
        commands: pruneCommands([...state.commands, record]),
        events: pushEvent(state.events, {
          at: action.at,
          tick: null,
          kind: "command",
          text: `${action.point} <- ${String(action.value)} sent`,
        }),
      };
    }
    case "command-result":
      return applyCommandResult(
        state,
        action.at,
        action.commandId,
        action.response,
      );
    case "command-failed":
      return {
        ...state,
        commands: state.commands.map((c) =>
          c.id === action.commandId
            ? { ...c, status: "failed" as const, detail: action.detail }
            : c,
        ),
        events: pushEvent(state.events, {
          at: action.at,
          tick: null,
          kind: "command",
          text: `command failed: ${action.detail}`,
        }),
      };
    case "protocol-error":
      return {
        ...state,
        events: pushEvent(state.events, {
          at: action.at,
          tick: null,
          kind: "protocol-error",
          text: action.detail,
        }),
      };
    case "set-mode":
      return { ...state, mode: action.mode };
  }
}

/** True when live data has gone quiet long enough to distrust it. */
export function isStale(state: HmiState, now: number): boolean {
  if (state.connection !== "live") {
    return true;
  }
  return (
    state.lastMessageAt !== null && now - state.lastMessageAt > STALE_AFTER_MS
  );
}

/**
 * Current closed/open view of every power switch: live point value
 * where one is bound, the model's static position otherwise.
 */
export function switchPositions(state: HmiState): Map<string, boolean> {
  const positions = new Map<string, boolean>();
  if (state.model === null) {
    return positions;
  }
  for (const sw of state.model.power.switches) {
    positions.set(sw.id, sw.closed);
  }
  for (const mp of state.model.points) {
    if (mp.switch === null) {
      continue;
    }
    const live = state.points.get(mp.name);
    if (live !== undefined && typeof live.value === "boolean") {
      positions.set(mp.switch, live.value);
    }
  }
  return positions;
}

/** Point names an operator may command, in display order. */
export function writablePoints(state: HmiState): string[] {
  return [...state.points.values()]
    .filter((p) => p.writable)
    .map((p) => p.name)
    .sort();
}
