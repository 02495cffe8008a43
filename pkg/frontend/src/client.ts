/**
 * Gateway client: owns the HTTP calls, the stream socket, and the
 * reconnect loop, and turns everything it learns into actions.
 *
 * All effects go through an injected Transport, so the tests drive
 * the client with scripted fetches, a fake socket, and a manual
 * clock.  The stream only carries per-tick diffs, which forces one
 * rule everywhere: every (re)connect must refetch the full snapshot,
 * or the display silently diverges from the process.
 */

import {
  commandResponseSchema,
  modelResponseSchema,
  pointsResponseSchema,
  streamFrameSchema,
} from "./schemas.js";
import type { PointValue, StreamFrame } from "./schemas.js";
import type { Action } from "./state.js";

export interface FetchResult {
  status: number;
  body: unknown;
}

export interface SocketHandlers {
  onOpen: () => void;
  onMessage: (text: string) => void;
  /** Fired once per socket, for both clean close and failure. */
  onClose: (reason: string) => void;
}

export interface SocketHandle {
  close(): void;
}

export type TimerHandle = unknown;

/** Injected effects; see browserTransport in main for the real one. */
export interface Transport {
  fetchJson(
    path: string,
    init?: { method?: string; body?: unknown },
  ): Promise<FetchResult>;
  openSocket(path: string, handlers: SocketHandlers): SocketHandle;
  now(): number;
  setTimer(fn: () => void, ms: number): TimerHandle;
  clearTimer(handle: TimerHandle): void;
}

/** First retry delay; doubles per attempt up to the cap. */
export const BACKOFF_BASE_MS = 500;
export const BACKOFF_CAP_MS = 10000;

export function backoffDelay(attempt: number): number {
  return Math.min(BACKOFF_BASE_MS * 2 ** Math.max(0, attempt - 1),
    BACKOFF_CAP_MS);
}

export class GatewayClient {
  private readonly transport: Transport;
  private readonly dispatch: (action: Action) => void;
  private socket: SocketHandle | null = null;
  private reconnectTimer: TimerHandle | null = null;
  private attempt = 0;
  private stopped = false;
  private nextCommandId = 1;
  /**
   * Frames received between socket open and the snapshot response
   * for that connection.  Held back so updates never name points the
   * state has not met yet; the reducer's tick checks make the flush
   * safe in either arrival order.
   */
  private heldFrames: StreamFrame[] | null = null;

  constructor(transport: Transport, dispatch: (action: Action) => void) {
    this.transport = transport;
    this.dispatch = dispatch;
  }

  /** Load the model, then connect the stream. */
  async start(): Promise<void> {
    const result = await this.transport.fetchJson("/model");
    const parsed = modelResponseSchema.safeParse(result.body);
    if (!parsed.success) {
      this.dispatch({
        type: "protocol-error",
        at: this.transport.now(),
        detail: `model response invalid: ${parsed.error.issues[0]?.message}`,
      });
    } else {
      this.dispatch({ type: "model-loaded", model: parsed.data });
    }
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    if (this.reconnectTimer !== null) {
      this.transport.clearTimer(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    if (this.socket !== null) {
      this.socket.close();
      this.socket = null;
    }
  }

  private connect(): void {
    if (this.stopped) {
      return;
    }
    this.heldFrames = [];
    this.socket = this.transport.openSocket("/stream", {
      onOpen: () => {
        this.attempt = 0;
        this.dispatch({
          type: "socket-state",
          at: this.transport.now(),
          phase: "live",
          attempt: 0,
        });
        void this.resync();
      },
      onMessage: (text) => this.onStreamMessage(text),
      onClose: (reason) => this.onStreamClosed(reason),
    });
  }

  /** Fetch the full snapshot, then release frames held meanwhile. */
  private async resync(): Promise<void> {
    try {
      const result = await this.transport.fetchJson("/points");
      const parsed = pointsResponseSchema.safeParse(result.body);
      if (!parsed.success) {
        this.dispatch({
          type: "protocol-error",
          at: this.transport.now(),
          detail:
            `points response invalid: ${parsed.error.issues[0]?.message}`,
        });
        return;
      }
      this.dispatch({
        type: "snapshot",
        at: this.transport.now(),
        response: parsed.data,
      });
    } finally {
      const held = this.heldFrames ?? [];
      this.heldFrames = null;
      for (const frame of held) {
        this.dispatch({
          type: "frame",
          at: this.transport.now(),
          frame,
        });
      }
    }
  }

  private onStreamMessage(text: string): void {
    let raw: unknown;
    try {
      raw = JSON.parse(text);
    } catch {
      this.dispatch({
        type: "protocol-error",
        at: this.transport.now(),
        detail: "stream frame is not JSON",
      });
      return;
    }
    const parsed = streamFrameSchema.safeParse(raw);
    if (!parsed.success) {
      this.dispatch({
        type: "protocol-error",
        at: this.transport.now(),
        detail: `stream frame invalid: ${parsed.error.issues[0]?.message}`,
      });
      return;
    }
    if (this.heldFrames !== null) {
      this.heldFrames.push(parsed.data);
      return;
    }
    this.dispatch({
      type: "frame",
      at: this.transport.now(),
      frame: parsed.data,
    });
  }

  private onStreamClosed(reason: string): void {
    this.socket = null;
    this.heldFrames = null;
    if (this.stopped) {
      return;
    }
    this.attempt += 1;
    this.dispatch({
      type: "socket-state",
      at: this.transport.now(),
      phase: "reconnecting",
      attempt: this.attempt,
      detail: reason,
    });
    this.reconnectTimer = this.transport.setTimer(() => {
      this.reconnectTimer = null;
      this.connect();
    }, backoffDelay(this.attempt));
  }

  /**
   * POST one command and report the outcome.  The returned promise
   * settles when the gateway answers; confirmation that the process
   * followed arrives later through the stream.
   */
  async sendCommand(point: string, value: PointValue,
    operatorId: string): Promise<void> {
    const commandId = this.nextCommandId;
    this.nextCommandId += 1;
    this.dispatch({
      type: "command-sent",
      at: this.transport.now(),
      commandId,
      point,
      value,
    });
    try {
      const result = await this.transport.fetchJson(
        `/points/${encodeURIComponent(point)}/command`,
        { method: "POST", body: { value, operator_id: operatorId } },
      );
      const parsed = commandResponseSchema.safeParse(result.body);
      if (!parsed.success) {
        this.dispatch({
          type: "command-failed",
          at: this.transport.now(),
          commandId,
          detail: `unparseable command response (http ${result.status})`,
        });
        return;
      }
      this.dispatch({
        type: "command-result",
        at: this.transport.now(),
        commandId,
        response: parsed.data,
      });
    } catch (err) {
      this.dispatch({
        type: "command-failed",
        at: this.transport.now(),
        commandId,
        detail: err instanceof Error ? err.message : String(err),
      });
    }
  }
}
