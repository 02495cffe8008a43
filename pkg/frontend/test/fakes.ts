/**
 * Scripted transport for client tests: fetches resolve only when the
 * test says so, sockets open and fail on command, and time moves
 * when advanced.  This makes races (frame before snapshot, reconnect
 * during fetch) reproducible instead of timing-dependent.
 */

import type {
  FetchResult,
  SocketHandle,
  SocketHandlers,
  TimerHandle,
  Transport,
} from "../src/client.js";

interface PendingFetch {
  path: string;
  init: { method?: string; body?: unknown } | undefined;
  resolve: (result: FetchResult) => void;
  reject: (err: Error) => void;
}

interface FakeTimer {
  fn: () => void;
  due: number;
  cleared: boolean;
}

export class FakeSocket implements SocketHandle {
  closedByClient = false;
  constructor(readonly handlers: SocketHandlers) {}

  open(): void {
    this.handlers.onOpen();
  }

  message(payload: unknown): void {
    this.handlers.onMessage(
      typeof payload === "string" ? payload : JSON.stringify(payload),
    );
  }

  fail(reason: string): void {
    this.handlers.onClose(reason);
  }

  close(): void {
    this.closedByClient = true;
  }
}

export class FakeTransport implements Transport {
  time = 0;
  pending: PendingFetch[] = [];
  fetchLog: { path: string; init?: { method?: string; body?: unknown } }[] =
    [];
  sockets: FakeSocket[] = [];
  timers: FakeTimer[] = [];

  fetchJson(
    path: string,
    init?: { method?: string; body?: unknown },
  ): Promise<FetchResult> {
    this.fetchLog.push({ path, init });
    return new Promise((resolve, reject) => {
      this.pending.push({ path, init, resolve, reject });
    });
  }

  /** Resolve the oldest pending fetch for the given path. */
  respond(path: string, result: FetchResult): void {
    const idx = this.pending.findIndex((p) => p.path === path);
    if (idx === -1) {
      throw new Error(`no pending fetch for ${path}`);
    }
    const [entry] = this.pending.splice(idx, 1);
    entry?.resolve(result);
  }

  failFetch(path: string, message: string): void {
    const idx = this.pending.findIndex((p) => p.path === path);
    if (idx === -1) {
      throw new Error(`no pending fetch for ${path}`);
    }
    const [entry] = this.pending.splice(idx, 1);
    entry?.reject(new Error(message));
  }

  openSocket(_path: string, handlers: SocketHandlers): SocketHandle {
    const socket = new FakeSocket(handlers);
    this.sockets.push(socket);
    return socket;
  }

  now(): number {
    return this.time;
  }

  setTimer(fn: () => void, ms: number): TimerHandle {
    const timer: FakeTimer = { fn, due: this.time + ms, cleared: false };
    this.timers.push(timer);
    return timer;
  }

  clearTimer(handle: TimerHandle): void {
    (handle as FakeTimer).cleared = true;
  }

  /** Move the clock forward, firing due timers in order. */
  advance(ms: number): void {
    this.time += ms;
    const due = this.timers
      .filter((t) => !t.cleared && t.due <= this.time)
      .sort((a, b) => a.due - b.due);
    this.timers = this.timers.filter((t) => !due.includes(t));
    for (const timer of due) {
      timer.fn();
    }
  }

  latestSocket(): FakeSocket {
    const socket = this.sockets[this.sockets.length - 1];
    if (socket === undefined) {
      throw new Error("no socket opened yet");
    }
    return socket;
  }
}

/** Let promise continuations queued by resolved fetches run. */
export async function flush(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
}
