"""Topology exports for plotting and downstream tooling.

Both layers of a compiled range can be rendered as Graphviz text or as
a JSON document.  Output ordering is fixed so repeated exports of the
same specification are identical.
"""
from __future__ import annotations

import json

from .compile import RangeSpec
from .errors import SgcrError

_NODE_SHAPES = {"ied": "box", "plc": "hexagon", "switch": "diamond",
                "gateway": "house", "attacker": "octagon"}


def _power_document(spec: RangeSpec) -> dict:
    net = spec.network
    return {
        "layer": "power",
        "base_mva": net.base_mva,
        "buses": [{"id": b.id, "name": b.name, "kv": b.nominal_kv}
                  for b in sorted(net.buses, key=lambda b: b.id)],
        "branches": sorted(
            [{"name": l.name, "kind": "line",
              "from": l.from_bus, "to": l.to_bus} for l in net.lines]
            + [{"name": t.name, "kind": "transformer",
                "from": t.hv_bus, "to": t.lv_bus}
               for t in net.transformers],
            key=lambda d: d["name"]),
        "switches": [{"id": s.id, "from": s.bus, "to": s.other_bus,
                      "kind": s.kind, "closed": s.closed}
                     for s in sorted(net.switches, key=lambda s: s.id)],
        "machines": sorted(
            [{"name": g.name, "kind": "generator", "bus": g.bus,
              "slack": g.is_slack} for g in net.generators]
            + [{"name": l.name, "kind": "load", "bus": l.bus}
               for l in net.loads],
            key=lambda d: d["name"]),
    }


def _cyber_document(spec: RangeSpec) -> dict:
    topo = spec.topology
    return {
        "layer": "cyber",
        "nodes": [{"name": n.name, "kind": n.kind, "ip": n.address.ip}
                  for n in sorted(topo.nodes.values(),
                                  key=lambda n: n.name)],
        "links": [{"cable": l.cable, "a": l.a[0], "b": l.b[0], "up": l.up}
                  for l in sorted(topo.links, key=lambda l: l.cable)],
    }


def _power_dot(doc: dict) -> str:
    lines = ["graph power {", "  node [shape=box];"]
    for bus in doc["buses"]:
        lines.append(f'  b{bus["id"]} [label="{bus["name"]}\\n'
                     f'{bus["kv"]} kV"];')
    for mach in doc["machines"]:
        shape = "circle" if mach["kind"] == "generator" else "invtriangle"
        lines.append(f'  "{mach["name"]}" [shape={shape}];')
        lines.append(f'  "{mach["name"]}" -- b{mach["bus"]};')
    for br in doc["branches"]:
        style = "bold" if br["kind"] == "transformer" else "solid"
        lines.append(f'  b{br["from"]} -- b{br["to"]} '
                     f'[label="{br["name"]}" style={style}];')
    for sw in doc["switches"]:
        style = "solid" if sw["closed"] else "dashed"
        lines.append(f'  b{sw["from"]} -- b{sw["to"]} '
                     f'[label="{sw["id"]}" style={style} color=gray];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _cyber_dot(doc: dict) -> str:
    lines = ["graph cyber {"]
    for node in doc["nodes"]:
        shape = _NODE_SHAPES.get(node["kind"], "box")
        label = node["name"]
        if node["ip"]:
            label += f'\\n{node["ip"]}'
        lines.append(f'  "{node["name"]}" [shape={shape} label="{label}"];')
    for link in doc["links"]:
        style = "solid" if link["up"] else "dotted"
        lines.append(f'  "{link["a"]}" -- "{link["b"]}" '
                     f'[label="{link["cable"]}" style={style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_topology(spec: RangeSpec, layer: str = "power",
                    fmt: str = "json") -> str:
    """Render one topology layer; layer in (power, cyber), fmt in (json, dot)."""
    if layer == "power":
        doc = _power_document(spec)
    elif layer == "cyber":
        doc = _cyber_document(spec)
    else:
        raise SgcrError(f"unknown topology layer {layer!r}")
    if fmt == "json":
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt == "dot":
        return _power_dot(doc) if layer == "power" else _cyber_dot(doc)
    raise SgcrError(f"unknown export format {fmt!r}")
