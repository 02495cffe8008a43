"""Cyber topology derivation and deterministic frame delivery.

Topology comes straight out of the merged network description: every
access point owner becomes a node, and two PhysConn entries naming the
same cable become a link.  Delivery is a simulated-time event queue:
frames traverse switch fabric along breadth-first paths, hosts never
forward, multicast fans out to subscribers, and taps get passive copies
of everything crossing the tapped node or link.  The queue is strictly
ordered by (time, sequence), so identical runs replay identically.
"""

from __future__ import annotations

import heapq
import ipaddress
from dataclasses import dataclass, field, replace

from .errors import (
    CableTriple,
    DanglingCable,
    SchemaViolation,
    UnknownScope,
    Unroutable,
)
from .scl.documents import Address, SclDocument

L2_MULTICAST = "l2_multicast"
UDP_MULTICAST = "udp_multicast"
TCP_SEGMENT = "tcp_segment"

NODE_KINDS = ("ied", "plc", "switch", "gateway", "attacker")

DEFAULT_LATENCY_MS = 0.1


@dataclass
class Node:
    name: str
    kind: str
    address: Address = field(default_factory=lambda: Address("", "", ""))
    subnetworks: set[str] = field(default_factory=set)


@dataclass
class Link:
    a: tuple[str, str]  # (node, port)
    b: tuple[str, str]
    cable: str
    latency_ms: float = DEFAULT_LATENCY_MS
    bandwidth_mbps: float | None = None
    up: bool = True

    def peer_of(self, node: str) -> str | None:
        if self.a[0] == node:
            return self.b[0]
        if self.b[0] == node:
            return self.a[0]
        return None


@dataclass
class CyberTopology:
    nodes: dict[str, Node] = field(default_factory=dict)
    links: list[Link] = field(default_factory=list)

    def node(self, name: str) -> Node | None:
        return self.nodes.get(name)

    def links_of(self, name: str) -> list[Link]:
        return [l for l in self.links if l.peer_of(name) is not None]

    def by_ip(self, ip: str) -> Node | None:
        for node in self.nodes.values():
            if node.address.ip == ip:
                return node
        return None


@dataclass
class Frame:
    kind: str  # l2_multicast, udp_multicast, tcp_segment
    src: str  # sending node name
    dst: str  # address, node name, or multicast group
    payload: bytes
    app_id: int = 0
    injected_by: str | None = None


def _node_kind(doc: SclDocument, name: str) -> str:
    ied = doc.find_ied(name)
    if ied is not None:
        t = ied.ied_type.upper()
        if t in ("SWITCH", "BRIDGE"):
            return "switch"
        if t == "PLC":
            return "plc"
        if t in ("GATEWAY", "SCADA", "HMI"):
            return "gateway"
        if t == "ATTACKER":
            return "attacker"
        return "ied"
    upper = name.upper()
    if upper.startswith(("SW", "BRIDGE")):
        return "switch"
    if "PLC" in upper:
        return "plc"
    if upper.startswith(("GW", "SCADA", "HMI")):
        return "gateway"
    return "ied"


def build_cyber_topology(merged_scd: SclDocument) -> CyberTopology:
    """Nodes from access points, links from matching cable identifiers.

    Raises DanglingCable for a cable with one endpoint, CableTriple for
    more than two, and SchemaViolation for duplicate addresses inside
    one subnetwork.
    """
    topo = CyberTopology()
    endpoints: dict[str, list[tuple[str, str]]] = {}
    if merged_scd.communication is None:
        return topo
    for sn in merged_scd.communication.subnetworks:
        seen_ips: set[str] = set()
        for ap in sn.connected_aps:
            node = topo.nodes.get(ap.ied_name)
            if node is None:
                node = Node(name=ap.ied_name,
                            kind=_node_kind(merged_scd, ap.ied_name),
                            address=ap.address)
                topo.nodes[ap.ied_name] = node
            elif not node.address.ip and ap.address.ip:
                node.address = ap.address
            node.subnetworks.add(sn.name)
            if ap.address.ip:
                if ap.address.ip in seen_ips:
                    raise SchemaViolation(
                        f"duplicate address {ap.address.ip} in subnetwork {sn.name}")
                seen_ips.add(ap.address.ip)
            for pc in ap.phys_conns:
                endpoints.setdefault(pc.cable, []).append((ap.ied_name, pc.port))
    for cable, ends in sorted(endpoints.items()):
        if len(ends) == 1:
            raise DanglingCable(f"cable {cable!r} has a single endpoint {ends[0]}")
        if len(ends) > 2:
            raise CableTriple(f"cable {cable!r} has {len(ends)} endpoints")
        topo.links.append(Link(a=ends[0], b=ends[1], cable=cable))
    return topo


@dataclass
class Tap:
    scope: str
    frames: list[tuple[float, Frame]] = field(default_factory=list)


@dataclass(order=True)
class _Event:
    time_ms: float
    seq: int
    node: str = field(compare=False)
    frame: Frame = field(compare=False)


class NetworkEmulator:
    """Deterministic store-and-forward emulation over a CyberTopology."""

    def __init__(self, topology: CyberTopology):
        self.topology = topology
        self._handlers: dict[str, object] = {}
        self._subscriptions: dict[int, set[str]] = {}
        self._taps_node: dict[str, list[Tap]] = {}
        self._taps_link: dict[str, list[Tap]] = {}
        self._queue: list[_Event] = []
        self._seq = 0
        self.now_ms = 0.0
        self.delivery_log: list[tuple[float, str, Frame]] = []
        self.injection_log: list[tuple[float, str, Frame]] = []

    # -- wiring ---------------------------------------------------------------

    def register_handler(self, node: str, handler) -> None:
        if node not in self.topology.nodes:
            raise UnknownScope(f"no node {node!r}")
        self._handlers[node] = handler

    def subscribe(self, node: str, app_id: int) -> None:
        if node not in self.topology.nodes:
            raise UnknownScope(f"no node {node!r}")
        self._subscriptions.setdefault(app_id, set()).add(node)

    def attach_tap(self, scope: str) -> Tap:
        """Passive copy of every frame traversing a node or a cable."""
        tap = Tap(scope=scope)
        if any(l.cable == scope for l in self.topology.links):
            self._taps_link.setdefault(scope, []).append(tap)
        elif scope in self.topology.nodes:
            self._taps_node.setdefault(scope, []).append(tap)
        else:
            raise UnknownScope(f"no node or cable named {scope!r}")
        return tap

    def add_attacker(self, name: str, attach_to: str, ip: str = "",
                     latency_ms: float = DEFAULT_LATENCY_MS) -> Node:
        """Attach a new attacker node by a fresh link to an existing node."""
        if attach_to not in self.topology.nodes:
            raise UnknownScope(f"no node {attach_to!r} to attach to")
        if name in self.topology.nodes:
            raise SchemaViolation(f"node {name!r} already exists")
        host = self.topology.nodes[attach_to]
        node = Node(name=name, kind="attacker", address=Address(ip, "", ""),
                    subnetworks=set(host.subnetworks))
        self.topology.nodes[name] = node
        self.topology.links.append(Link(
            a=(name, "1"), b=(attach_to, "tap"), cable=f"atk:{name}",
            latency_ms=latency_ms))
        return node

    def drop_link(self, cable: str) -> None:
        found = False
        for link in self.topology.links:
            if link.cable == cable:
                link.up = False
                found = True
        if not found:
            raise UnknownScope(f"no cable {cable!r}")

    # -- routing ----------------------------------------------------------------

    def _adjacency(self) -> dict[str, list[Link]]:
        adj: dict[str, list[Link]] = {}
        for link in self.topology.links:
            if not link.up:
                continue
            adj.setdefault(link.a[0], []).append(link)
            adj.setdefault(link.b[0], []).append(link)
        return adj

    def _paths_from(self, src: str) -> dict[str, list[Link]]:
        """Shortest link paths from src; only switches forward."""
        adj = self._adjacency()
        paths: dict[str, list[Link]] = {src: []}
        frontier = [src]
        while frontier:
            nxt: list[str] = []
            for here in frontier:
                if here != src and self.topology.nodes[here].kind != "switch":
                    continue  # hosts receive but do not forward
                for link in adj.get(here, []):
                    peer = link.peer_of(here)
                    if peer in paths:
                        continue
                    paths[peer] = paths[here] + [link]
                    nxt.append(peer)
            frontier = nxt
        return paths

    def _resolve_unicast(self, dst: str) -> str | None:
        name = dst.split(":", 1)[0]
        node = self.topology.by_ip(name)
        if node is not None:
            return node.name
        if name in self.topology.nodes:
            return name
        return None

    def _delivery_targets(self, frame: Frame,
                          origin: str) -> dict[str, list[Link]]:
        src_node = self.topology.nodes.get(origin)
        if src_node is None:
            raise Unroutable(f"source {origin!r} is not attached")
        paths = self._paths_from(origin)
        if frame.kind == TCP_SEGMENT:
            target = self._resolve_unicast(frame.dst)
            if target is None:
                raise Unroutable(f"no node owns address {frame.dst!r}")
            if target not in paths:
                raise Unroutable(f"no path from {origin} to {target}")
            return {target: paths[target]}
        if frame.kind == UDP_MULTICAST:
            group = frame.dst.split(":", 1)[0]
            try:
                if not ipaddress.IPv4Address(group).is_multicast:
                    raise Unroutable(f"{frame.dst!r} is not a multicast group")
            except ipaddress.AddressValueError as exc:
                raise Unroutable(f"bad multicast group {frame.dst!r}") from exc
        subscribers = self._subscriptions.get(frame.app_id, set())
        targets: dict[str, list[Link]] = {}
        for node in sorted(subscribers):
            if node == origin or node not in paths:
                continue
            if frame.kind == L2_MULTICAST:
                # link-layer scope: stays inside the sender's subnetwork
                if not (self.topology.nodes[node].subnetworks
                        & src_node.subnetworks):
                    continue
            targets[node] = paths[node]
        return targets

    def _link_delay(self, link: Link, frame: Frame) -> float:
        delay = link.latency_ms
        if link.bandwidth_mbps:
            delay += len(frame.payload) * 8.0 / (link.bandwidth_mbps * 1e6) * 1e3
        return delay

    def _record_taps(self, frame: Frame, paths: list[list[Link]],
                     t0: float) -> None:
        # One transmission per link per frame: shared segments are not
        # double-counted when a multicast fans out behind them.
        link_times: dict[str, float] = {}
        node_times: dict[str, float] = {frame.src: t0}
        for path in paths:
            t = t0
            here = frame.src
            for link in path:
                t += self._link_delay(link, frame)
                if link.cable not in link_times or t < link_times[link.cable]:
                    link_times[link.cable] = t
                here = link.peer_of(here)
                if here not in node_times or t < node_times[here]:
                    node_times[here] = t
        for cable, t in link_times.items():
            for tap in self._taps_link.get(cable, []):
                tap.frames.append((t, frame))
        for name, t in node_times.items():
            for tap in self._taps_node.get(name, []):
                tap.frames.append((t, frame))

    # -- sending ----------------------------------------------------------------

    def send_frame(self, frame: Frame, at_ms: float | None = None,
                   route_from: str | None = None) -> list[str]:
        """Schedule delivery; returns the computed receiver set."""
        if not frame.payload:
            raise Unroutable("empty payload")
        t0 = self.now_ms if at_ms is None else max(at_ms, self.now_ms)
        origin = route_from or frame.src
        if origin in self.topology.nodes and not any(
                l.up for l in self.topology.links_of(origin)):
            raise Unroutable(f"{origin} has no live links")
        targets = self._delivery_targets(frame, origin)
        for node, path in sorted(targets.items()):
            t = t0 + sum(self._link_delay(link, frame) for link in path)
            self._seq += 1
            delivered = replace(frame, injected_by=None)
            heapq.heappush(self._queue, _Event(t, self._seq, node, delivered))
        origin_frame = frame if origin == frame.src else replace(frame, src=origin)
        self._record_taps(origin_frame, list(targets.values()), t0)
        return sorted(targets)

    def inject_frame(self, at: str, frame: Frame, at_ms: float | None = None,
                     injected_by: str | None = None) -> list[str]:
        """Send a frame as if emitted at an attacker's attachment point.

        The claimed source survives untouched (spoofing is allowed) but
        routing always starts at the injection point.  Receivers get a
        copy with injected_by cleared; only the emulator log keeps it.
        """
        node = self.topology.nodes.get(at)
        if node is None or not any(l.up for l in self.topology.links_of(at)):
            raise Unroutable(f"injection point {at!r} is detached")
        tagged = replace(frame, injected_by=injected_by or at)
        self.injection_log.append((self.now_ms if at_ms is None else at_ms,
                                   at, tagged))
        return self.send_frame(tagged, at_ms=at_ms, route_from=at)

    # -- time --------------------------------------------------------------------

    def run_until(self, time_ms: float) -> int:
        """Deliver queued frames with timestamp <= time_ms, in order."""
        count = 0
        while self._queue and self._queue[0].time_ms <= time_ms:
            event = heapq.heappop(self._queue)
            self.now_ms = max(self.now_ms, event.time_ms)
            self.delivery_log.append((event.time_ms, event.node, event.frame))
            handler = self._handlers.get(event.node)
            if handler is not None:
                handler(event.frame, event.time_ms)
            count += 1
        self.now_ms = max(self.now_ms, time_ms)
        return count

    def pending(self) -> int:
        return len(self._queue)
