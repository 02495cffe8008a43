/**
 * Single-line diagram renderer.
 *
 * renderSld is a pure function from HMI state to an SVG string: no
 * DOM, no clock, no randomness.  Identical state yields an identical
 * string, which the tests rely on, and which makes the diagram safe
 * to re-render on every action without visual churn.
 *
 * Layout is columnar: one column per station (buses grouped by the
 * leading segment of their path-style name), buses stacked inside a
 * column with higher voltages on top.  Everything is sorted before
 * placement, so element order in the model cannot move the picture.
 */

import type { Branch, Bus, Machine, Switch } from "./schemas.js";
import type { HmiState } from "./state.js";
import { switchPositions } from "./state.js";

/** Geometry constants; all positions derive from these. */
export const SLD_GEOMETRY = {
  /** Width of one station column, bar included. */
  stationWidth: 260,
  /** Horizontal gap between station columns. */
  stationGap: 90,
  /** Bus bar length. */
  busWidth: 220,
  /** Vertical distance between bus rows. */
  rowHeight: 130,
  /** Top margin above the first bus row. */
  topMargin: 110,
  /** Bottom margin below the last bus row. */
  bottomMargin: 90,
  /** Side margin before the first column. */
  sideMargin: 40,
  /** Square breaker glyph edge length. */
  switchSize: 16,
  /** Machine glyph offset from its bus. */
  machineOffset: 52,
} as const;

/** Colour and stroke constants, one place only. */
export const SLD_STYLE = {
  busStroke: "#1f2937",
  busStrokeWidth: 4,
  connectorStroke: "#64748b",
  connectorStrokeWidth: 1.6,
  closedFill: "#1f2937",
  openFill: "#ffffff",
  glyphStroke: "#1f2937",
  labelColor: "#334155",
  stationColor: "#0f172a",
  staleOverlay: "#94a3b8",
} as const;

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function px(value: number): string {
  return String(Math.round(value * 10) / 10);
}

interface Point2d {
  x: number;
  y: number;
}

interface Layout {
  /** Bus id -> bar geometry. */
  buses: Map<number, { x0: number; x1: number; y: number; bus: Bus }>;
  /** Bus id -> element name -> anchor point on the bar. */
  anchors: Map<number, Map<string, Point2d>>;
  stations: { name: string; x: number }[];
  width: number;
  height: number;
}

function stationOf(bus: Bus): string {
  const cut = bus.name.indexOf("/");
  return cut === -1 ? bus.name : bus.name.slice(0, cut);
}

function busLabel(bus: Bus): string {
  const cut = bus.name.indexOf("/");
  return cut === -1 ? bus.name : bus.name.slice(cut + 1);
}

/**
 * Assign every bus a bar position and every connected element an
 * anchor slot along its bar.  Slots are allocated in sorted element
 * name order, so anchors cannot shuffle between renders.
 */
function computeLayout(
  buses: Bus[],
  branches: Branch[],
  switches: Switch[],
  machines: Machine[],
): Layout {
  const g = SLD_GEOMETRY;
  const stations = [...new Set(buses.map(stationOf))].sort();
  const stationX = new Map<string, number>();
  stations.forEach((name, i) => {
    stationX.set(name, g.sideMargin + i * (g.stationWidth + g.stationGap));
  });

  const placed = new Map<
    number,
    { x0: number; x1: number; y: number; bus: Bus }
  >();
  let maxRows = 0;
  for (const name of stations) {
    const local = buses
      .filter((b) => stationOf(b) === name)
      .sort((a, b) => b.kv - a.kv || a.name.localeCompare(b.name));
    maxRows = Math.max(maxRows, local.length);
    const x = stationX.get(name) ?? 0;
    local.forEach((bus, row) => {
      const x0 = x + (g.stationWidth - g.busWidth) / 2;
      placed.set(bus.id, {
        x0,
        x1: x0 + g.busWidth,
        y: g.topMargin + row * g.rowHeight,
        bus,
      });
    });
  }

  const touching = new Map<number, string[]>();
  const touch = (busId: number, element: string) => {
    const list = touching.get(busId) ?? [];
    list.push(element);
    touching.set(busId, list);
  };
  for (const br of branches) {
    touch(br.from, `b:${br.name}`);
    touch(br.to, `b:${br.name}`);
  }
  for (const sw of switches) {
    touch(sw.from, `s:${sw.id}`);
    touch(sw.to, `s:${sw.id}`);
  }
  for (const m of machines) {
    touch(m.bus, `m:${m.name}`);
  }

  const anchors = new Map<number, Map<string, Point2d>>();
  for (const [busId, elements] of touching) {
    const bar = placed.get(busId);
    if (bar === undefined) {
      continue;
    }
    const slots = new Map<string, Point2d>();
    const ordered = [...elements].sort();
    ordered.forEach((element, i) => {
      const x = bar.x0 + ((bar.x1 - bar.x0) * (i + 1)) / (ordered.length + 1);
      slots.set(element, { x, y: bar.y });
    });
    anchors.set(busId, slots);
  }

  return {
    buses: placed,
    anchors,
    stations: stations.map((name) => ({ name, x: stationX.get(name) ?? 0 })),
    width:
      g.sideMargin * 2 +
      stations.length * g.stationWidth +
      Math.max(0, stations.length - 1) * g.stationGap,
    height: g.topMargin + Math.max(1, maxRows) * g.rowHeight + g.bottomMargin,
  };
}

function anchorFor(layout: Layout, busId: number, element: string): Point2d {
  const point = layout.anchors.get(busId)?.get(element);
  if (point !== undefined) {
    return point;
  }
  const bar = layout.buses.get(busId);
  return bar === undefined
    ? { x: 0, y: 0 }
    : { x: (bar.x0 + bar.x1) / 2, y: bar.y };
}

function renderStyle(): string {
  const s = SLD_STYLE;
  return [
    "<style>",
    `.bus{stroke:${s.busStroke};stroke-width:${s.busStrokeWidth};}`,
    `.conn{stroke:${s.connectorStroke};` +
      `stroke-width:${s.connectorStrokeWidth};fill:none;}`,
    `.sw{stroke:${s.glyphStroke};stroke-width:1.6;}`,
    `.sw.closed{fill:${s.closedFill};}`,
    `.sw.open{fill:${s.openFill};}`,
    `.glyph{stroke:${s.glyphStroke};stroke-width:1.6;fill:none;}`,
    `.lbl{fill:${s.labelColor};font:10px sans-serif;}`,
    `.station{fill:${s.stationColor};font:600 13px sans-serif;}`,
    `.gtext{fill:${s.glyphStroke};font:600 11px sans-serif;` +
      `text-anchor:middle;}`,
    `svg.stale .sw,svg.stale .bus,svg.stale .conn,svg.stale .glyph` +
      `{stroke:${s.staleOverlay};}`,
    `svg.stale .sw.closed{fill:${s.staleOverlay};}`,
    "</style>",
  ].join("");
}

export interface RenderOptions {
  /** Grey the diagram out when the data behind it is stale. */
  stale?: boolean;
}

/**
 * Render the power layer of the loaded model with live switch states
 * overlaid.  Returns a complete, standalone SVG document string; an
 * empty-model placeholder when nothing is loaded yet.
 */
export function renderSld(state: HmiState, options: RenderOptions = {}): string {
  if (state.model === null) {
    return (
      '<svg xmlns="http://www.w3.org/2000/svg" width="400" height="80">' +
      '<text x="16" y="44" font-family="sans-serif" font-size="13">' +
      "waiting for model</text></svg>"
    );
  }
  const g = SLD_GEOMETRY;
  const power = state.model.power;
  const layout = computeLayout(
    power.buses,
    power.branches,
    power.switches,
    power.machines,
  );
  const positions = switchPositions(state);
  const pointOfSwitch = new Map<string, string>();
  for (const mp of state.model.points) {
    if (mp.switch !== null) {
      pointOfSwitch.set(mp.switch, mp.name);
    }
  }

  const parts: string[] = [];
  const rootClass = options.stale ? ' class="stale"' : "";
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${layout.width}" ` +
      `height="${layout.height}" viewBox="0 0 ${layout.width} ` +
      `${layout.height}"${rootClass} data-tick="${state.tick}">`,
  );
  parts.push(renderStyle());

  for (const station of layout.stations) {
    parts.push(
      `<text class="station" x="${px(station.x + g.stationWidth / 2)}" ` +
        `y="28" text-anchor="middle">${esc(station.name)}</text>`,
    );
  }

  const sortedBuses = [...layout.buses.values()].sort(
    (a, b) => a.bus.id - b.bus.id,
  );
  for (const bar of sortedBuses) {
    parts.push(
      `<line class="bus" x1="${px(bar.x0)}" y1="${px(bar.y)}" ` +
        `x2="${px(bar.x1)}" y2="${px(bar.y)}" data-bus="${bar.bus.id}">` +
        `</line>`,
    );
    parts.push(
      `<text class="lbl" x="${px(bar.x0)}" y="${px(bar.y - 7)}">` +
        `${esc(busLabel(bar.bus))} ${esc(String(bar.bus.kv))}kV</text>`,
    );
  }

  const sortedBranches = [...power.branches].sort((a, b) =>
    a.name.localeCompare(b.name),
  );
  for (const br of sortedBranches) {
    const a = anchorFor(layout, br.from, `b:${br.name}`);
    const b = anchorFor(layout, br.to, `b:${br.name}`);
    parts.push(
      `<line class="conn" x1="${px(a.x)}" y1="${px(a.y)}" ` +
        `x2="${px(b.x)}" y2="${px(b.y)}" data-branch="${esc(br.name)}">` +
        `</line>`,
    );
    const mx = (a.x + b.x) / 2;
    const my = (a.y + b.y) / 2;
    if (br.kind === "transformer") {
      parts.push(
        `<circle class="glyph" cx="${px(mx)}" cy="${px(my - 5)}" r="9">` +
          `</circle>` +
          `<circle class="glyph" cx="${px(mx)}" cy="${px(my + 5)}" r="9">` +
          `</circle>`,
      );
    }
    parts.push(
      `<text class="lbl" x="${px(mx + 12)}" y="${px(my + 3)}">` +
        `${esc(br.name)}</text>`,
    );
  }

  const sortedSwitches = [...power.switches].sort((a, b) =>
    a.id.localeCompare(b.id),
  );
  for (const sw of sortedSwitches) {
    const a = anchorFor(layout, sw.from, `s:${sw.id}`);
    const b = anchorFor(layout, sw.to, `s:${sw.id}`);
    const closed = positions.get(sw.id) ?? sw.closed;
    const mx = (a.x + b.x) / 2;
    const my = (a.y + b.y) / 2;
    const half = g.switchSize / 2;
    const point = pointOfSwitch.get(sw.id);
    const pointAttr =
      point === undefined ? "" : ` data-point="${esc(point)}"`;
    parts.push(
      `<line class="conn" x1="${px(a.x)}" y1="${px(a.y)}" ` +
        `x2="${px(b.x)}" y2="${px(b.y)}"></line>`,
    );
    parts.push(
      `<rect class="sw ${closed ? "closed" : "open"}" ` +
        `x="${px(mx - half)}" y="${px(my - half)}" ` +
        `width="${g.switchSize}" height="${g.switchSize}" ` +
        `data-switch="${esc(sw.id)}"${pointAttr}>` +
        `<title>${esc(sw.id)}: ${closed ? "closed" : "open"}` +
        `${point === undefined ? "" : ` (${esc(point)})`}</title>` +
        `</rect>`,
    );
    parts.push(
      `<text class="lbl" x="${px(mx + half + 4)}" y="${px(my + 3)}">` +
        `${esc(sw.id)}</text>`,
    );
  }

  const sortedMachines = [...power.machines].sort((a, b) =>
    a.name.localeCompare(b.name),
  );
  for (const m of sortedMachines) {
    const a = anchorFor(layout, m.bus, `m:${m.name}`);
    const isGen = m.kind === "generator";
    const y = isGen ? a.y - g.machineOffset : a.y + g.machineOffset;
    parts.push(
      `<line class="conn" x1="${px(a.x)}" y1="${px(a.y)}" ` +
        `x2="${px(a.x)}" y2="${px(y)}"></line>`,
    );
    if (isGen) {
      parts.push(
        `<circle class="glyph" cx="${px(a.x)}" cy="${px(y - 12)}" r="13" ` +
          `data-machine="${esc(m.name)}"></circle>` +
          `<text class="gtext" x="${px(a.x)}" y="${px(y - 8)}">G</text>`,
      );
    } else {
      parts.push(
        `<path class="glyph" d="M ${px(a.x - 9)} ${px(y)} L ` +
          `${px(a.x + 9)} ${px(y)} L ${px(a.x)} ${px(y + 14)} Z" ` +
          `data-machine="${esc(m.name)}"></path>`,
      );
    }
    parts.push(
      `<text class="lbl" x="${px(a.x + 14)}" ` +
        `y="${px(isGen ? y - 8 : y + 10)}">${esc(m.name)}</text>`,
    );
  }

  parts.push("</svg>");
  return parts.join("");
}
