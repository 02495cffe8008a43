/**
 * HTML fragment builders for everything around the diagram: status
 * banner, point table, and event feed.
 *
 * Same contract as the diagram renderer: pure functions from state
 * to strings.  The app layer owns the DOM and event wiring; these
 * functions only decide what the panels say.
 */

import type { HmiState, PointRecord } from "./state.js";
import { formatValue, isStale } from "./state.js";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Connection and freshness banner.  The severity class drives the
 * colour: ok (live and fresh), warn (stale data), bad (no stream).
 */
export function renderBanner(state: HmiState, now: number): string {
  const stale = isStale(state, now);
  let severity: string;
  let text: string;
  if (state.connection === "connecting") {
    severity = "bad";
    text = "connecting to gateway";
  } else if (state.connection === "reconnecting") {
    severity = "bad";
    text = `stream lost, reconnecting (attempt ${state.reconnectAttempt})`;
  } else if (stale) {
    severity = "warn";
    text = "stream silent, data may be stale";
  } else {
    severity = "ok";
    text = `live, tick ${state.tick}`;
  }
  const mode = state.mode === "operator" ? "operator" : "observer (read only)";
  return (
    `<div class="banner ${severity}">` +
    `<span class="banner-text">${esc(text)}</span>` +
    `<span class="banner-mode" data-mode="${state.mode}">${esc(mode)}</span>` +
    `</div>`
  );
}

function hasOutstandingCommand(state: HmiState, point: string): boolean {
  return state.commands.some(
    (c) =>
      c.point === point && (c.status === "sent" || c.status === "acked"),
  );
}

function rowFor(state: HmiState, p: PointRecord): string {
  const pending = hasOutstandingCommand(state, p.name);
  const classes = ["point-row"];
  if (p.quality !== "good") {
    classes.push("bad-quality");
  }
  if (pending) {
    classes.push("pending");
  }
  const controls =
    p.writable && state.mode === "operator" && typeof p.value === "boolean"
      ? `<button data-command="${esc(p.name)}" data-value="true"` +
        `${pending ? " disabled" : ""}>close</button>` +
        `<button data-command="${esc(p.name)}" data-value="false"` +
        `${pending ? " disabled" : ""}>open</button>`
      : "";
  return (
    `<tr class="${classes.join(" ")}" data-point="${esc(p.name)}">` +
    `<td>${esc(p.name)}</td>` +
    `<td class="value">${esc(formatValue(p.value))}` +
    `${pending ? ' <span class="pending-mark">cmd pending</span>' : ""}</td>` +
    `<td>${esc(p.quality)}</td>` +
    `<td>${p.tick}</td>` +
    `<td>${controls}</td>` +
    `</tr>`
  );
}

/** Point table, one row per SCADA point, writable rows get buttons. */
export function renderPointTable(state: HmiState): string {
  const rows = [...state.points.values()]
    .sort((a, b) => a.name.localeCompare(b.name))
    .map((p) => rowFor(state, p))
    .join("");
  return (
    `<table class="points">` +
    `<thead><tr><th>point</th><th>value</th><th>quality</th>` +
    `<th>tick</th><th></th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

/** Event feed, newest first, capped upstream by the reducer. */
export function renderEventFeed(state: HmiState, limit = 40): string {
  const rows = [...state.events]
    .reverse()
    .slice(0, limit)
    .map(
      (e) =>
        `<li class="evt ${e.kind}">` +
        `<span class="evt-tick">${e.tick === null ? "-" : `t${e.tick}`}` +
        `</span> ${esc(e.text)}</li>`,
    )
    .join("");
  return `<ul class="events">${rows}</ul>`;
}
