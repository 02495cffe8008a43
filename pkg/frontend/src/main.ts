/**
 * Browser entry point.  Everything here is wiring: the real
 * transport over fetch and WebSocket, the render loop, and DOM event
 * handlers.  Behaviour lives in the tested modules this one calls.
 */

import { createStore } from "./app.js";
import { GatewayClient } from "./client.js";
import type { SocketHandlers, Transport } from "./client.js";
import { renderBanner, renderEventFeed, renderPointTable } from "./panels.js";
import { renderSld } from "./sld.js";
import { isStale } from "./state.js";

function browserTransport(): Transport {
  return {
    async fetchJson(path, init) {
      const response = await fetch(path, {
        method: init?.method ?? "GET",
        headers:
          init?.body === undefined
            ? undefined
            : { "content-type": "application/json" },
        body: init?.body === undefined ? undefined : JSON.stringify(init.body),
      });
      let body: unknown = null;
      try {
        body = await response.json();
      } catch {
        body = null;
      }
      return { status: response.status, body };
    },
    openSocket(path, handlers: SocketHandlers) {
      const scheme = location.protocol === "https:" ? "wss" : "ws";
      const ws = new WebSocket(`${scheme}://${location.host}${path}`);
      let closed = false;
      const closeOnce = (reason: string) => {
        if (!closed) {
          closed = true;
          handlers.onClose(reason);
        }
      };
      ws.onopen = () => handlers.onOpen();
      ws.onmessage = (ev) => handlers.onMessage(String(ev.data));
      ws.onerror = () => closeOnce("socket error");
      ws.onclose = (ev) => closeOnce(`closed (${ev.code})`);
      return { close: () => ws.close() };
    },
    now: () => Date.now(),
    setTimer: (fn, ms) => setTimeout(fn, ms),
    clearTimer: (handle) => clearTimeout(handle as number),
  };
}

function mustFind(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing #${id}`);
  }
  return el;
}

function main(): void {
  const bannerEl = mustFind("banner");
  const sldEl = mustFind("sld");
  const pointsEl = mustFind("points");
  const eventsEl = mustFind("events");
  const modeEl = mustFind("mode-toggle") as HTMLInputElement;
  const operatorEl = mustFind("operator-id") as HTMLInputElement;

  const store = createStore("operator");
  const transport = browserTransport();
  const client = new GatewayClient(transport, store.dispatch);

  const render = () => {
    const state = store.getState();
    const now = transport.now();
    bannerEl.innerHTML = renderBanner(state, now);
    sldEl.innerHTML = renderSld(state, { stale: isStale(state, now) });
    pointsEl.innerHTML = renderPointTable(state);
    eventsEl.innerHTML = renderEventFeed(state);
  };

  store.subscribe(render);
  // Staleness is a function of the clock, not of actions, so the
  // banner needs a heartbeat render even when the stream is silent.
  setInterval(render, 1000);

  pointsEl.addEventListener("click", (ev) => {
    const target = ev.target as HTMLElement;
    const point = target.getAttribute("data-command");
    if (point === null) {
      return;
    }
    if (store.getState().mode !== "operator") {
      return;
    }
    const value = target.getAttribute("data-value") === "true";
    const operator = operatorEl.value.trim() || "hmi";
    void client.sendCommand(point, value, operator);
  });

  modeEl.addEventListener("change", () => {
    store.dispatch({
      type: "set-mode",
      mode: modeEl.checked ? "operator" : "observer",
    });
  });

  render();
  void client.start();
}

main();
