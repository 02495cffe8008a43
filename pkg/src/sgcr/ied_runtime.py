"""Virtual protection devices: data models, scan cycles, and messaging.

A device is assembled from its capability description plus two
supplements: the point mapping (which solver quantities feed which
data attributes) and the protection settings (thresholds, trip targets,
interlock partners).  Each scan copies mapped measurements out of the
store, evaluates the configured protection functions, issues breaker
commands, and publishes state datasets with change counters.  Devices
also answer read/write requests arriving as length-prefixed JSON over
the emulated stream.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

from .errors import (
    MissingThreshold,
    MissingValue,
    NoSuchPath,
    NotWritable,
    SchemaViolation,
    UnmappedAttribute,
)
from .net_emu import Frame, L2_MULTICAST, UDP_MULTICAST
from .scl.documents import (
    GOOSE,
    PROTECTION_CLASSES,
    RGOOSE,
    SclDocument,
    split_attribute_path,
    split_ln_token,
)
from .scl.supplements import SupplementDoc
from .sim_store import GOOD, SimStore

DECISION_NONE = "none"
DECISION_ALARM = "alarm"
DECISION_TRIP = "trip"

ACCEPTED = "accepted"
REJECTED_STALE = "rejected_stale"

STNUM_MAX = 2**32 - 1
HEARTBEAT_TICKS = 10
RESYNC_PUBLISH_INTERVALS = 10

OVER_FUNCTIONS = ("PTOC", "PTOV", "PDIF")
UNDER_FUNCTIONS = ("PTUV",)

# Attribute paths under these classes live inside the device itself;
# anything else must arrive through the point mapping.
_INTERNAL_CLASSES = set(PROTECTION_CLASSES) | {"XCBR", "CSWI", "LLN0", "GGIO"}

_THRESHOLD_UNIT_SCALE = {"pu": 1.0, "kA": 1.0, "kV": 1.0, "ohm": 1.0,
                         "A": 1e-3, "V": 1e-3}


def encode_message(obj: dict) -> bytes:
    body = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return struct.pack(">I", len(body)) + body


def decode_messages(data: bytes) -> tuple[list[dict], bytes]:
    """Split a byte stream into complete JSON messages plus any tail."""
    out: list[dict] = []
    while len(data) >= 4:
        (length,) = struct.unpack(">I", data[:4])
        if len(data) < 4 + length:
            break
        out.append(json.loads(data[4:4 + length].decode()))
        data = data[4 + length:]
    return out, data


@dataclass
class ProtectionConfig:
    kind: str
    instance: int
    monitored: list[str]
    alarm_threshold: float | None
    trip_threshold: float | None
    target_cb: str | None  # store point the trip command opens
    units: str = "pu"
    zone_impedance_ohm: float | None = None
    partner_current: str | None = None
    source_cb: str | None = None  # watched remote breaker attribute (CILO)
    local_state: str | None = None  # own breaker attribute mirrored by CILO
    min_pickup: float = 0.05

    @property
    def ln_name(self) -> str:
        return f"{self.kind}{self.instance}"


@dataclass
class Publication:
    control_block: str
    kind: str  # GOOSE | RGOOSE
    app_id: int
    dataset: str
    members: list[str]
    stnum: int = 0
    sqnum: int = 0
    last_entries: list[list] | None = None
    last_publish_tick: int = -10**9
    interval_ticks: int = HEARTBEAT_TICKS


@dataclass
class Subscription:
    app_id: int
    dataset_ref: str
    last_accepted_stnum: int = 0
    last_accept_tick: int = 0
    publish_interval: int = HEARTBEAT_TICKS


@dataclass
class GooseMessage:
    app_id: int
    dataset: str
    stnum: int
    sqnum: int
    entries: list[list]  # [path, value] pairs in dataset member order
    transport: str = "l2"  # l2 | routable

    def to_payload(self) -> bytes:
        return json.dumps({
            "app_id": self.app_id, "dataset": self.dataset,
            "stnum": self.stnum, "sqnum": self.sqnum,
            "entries": self.entries,
        }, sort_keys=True, separators=(",", ":")).encode()

    @staticmethod
    def from_payload(payload: bytes, transport: str = "l2") -> GooseMessage:
        obj = json.loads(payload.decode())
        return GooseMessage(app_id=obj["app_id"], dataset=obj["dataset"],
                            stnum=obj["stnum"], sqnum=obj["sqnum"],
                            entries=[list(e) for e in obj["entries"]],
                            transport=transport)


@dataclass
class Action:
    tick: int
    ied: str
    kind: str  # alarm | trip | interlock | publish | stale
    subject: str
    value: object = None
    note: str = ""

    def as_dict(self) -> dict:
        return {"tick": self.tick, "ied": self.ied, "kind": self.kind,
                "subject": self.subject, "value": self.value,
                "note": self.note}


def _quantity_of(physical_path: str) -> str:
    return physical_path.rsplit(".", 1)[-1]


def _ln_class_of(attribute_path: str) -> str:
    segments = split_attribute_path(attribute_path)
    cls, _ = split_ln_token(segments[1])
    return cls


class VirtualIed:
    """One protection device: data model, protections, and messaging."""

    def __init__(self, name: str, server_port: int = 10102):
        self.name = name
        self.server_port = server_port
        self.data_model: dict[str, object] = {}
        self.quality: dict[str, str] = {}
        self.protections: list[ProtectionConfig] = []
        self.publications: list[Publication] = []
        self.subscriptions: dict[int, Subscription] = {}
        # attribute path -> store point (both directions kept)
        self.mapping: dict[str, str] = {}
        self.point_of: dict[str, str] = {}
        self.store: SimStore | None = None
        self.emulator = None
        self.actions: list[Action] = []
        # (tick, app_id, stnum, verdict) per state message heard
        self.goose_log: list[tuple[int, int, int, str]] = []
        self._writable_attrs: set[str] = set()

    # -- wiring -----------------------------------------------------------

    def attach(self, store: SimStore, emulator=None) -> None:
        self.store = store
        self.emulator = emulator

    def subscribe(self, app_id: int, dataset_ref: str,
                  publish_interval: int = HEARTBEAT_TICKS) -> None:
        self.subscriptions[app_id] = Subscription(
            app_id=app_id, dataset_ref=dataset_ref,
            publish_interval=publish_interval)

    def remote_inputs(self) -> set[str]:
        """Attribute paths this device needs but does not own."""
        wanted: set[str] = set()
        for cfg in self.protections:
            for path in cfg.monitored + [cfg.partner_current, cfg.source_cb]:
                if path and split_attribute_path(path)[0] != self.name:
                    wanted.add(path)
        return wanted

    def _ensure_path(self, path: str, value: object = 0.0) -> None:
        if path not in self.data_model:
            self.data_model[path] = value
            self.quality[path] = GOOD

    # -- scan -----------------------------------------------------------------

    def scan_cycle(self, store: SimStore, now_tick: int) -> list[Action]:
        actions: list[Action] = []
        self._refresh_inputs(store)
        decisions: list[tuple[ProtectionConfig, str]] = []
        for cfg in self.protections:
            if cfg.kind == "PTRC":
                continue  # aggregated after the individual functions
            if cfg.kind == "CILO":
                actions.extend(self._run_interlock(cfg, store, now_tick))
                continue
            try:
                decision = eval_protection(cfg, self.data_model)
            except MissingValue:
                continue  # remote inputs not heard yet; take no action
            decisions.append((cfg, decision))
            flag_base = f"{self.name}.{cfg.ln_name}"
            self._set_model(f"{flag_base}.Str.general",
                            decision != DECISION_NONE)
            self._set_model(f"{flag_base}.Op.general",
                            decision == DECISION_TRIP)
            if decision == DECISION_ALARM:
                actions.append(Action(now_tick, self.name, "alarm",
                                      cfg.ln_name,
                                      note="between alarm and trip levels"))
        actions.extend(self._issue_trips(decisions, store, now_tick))
        actions.extend(self._publish_due(now_tick))
        self.actions.extend(actions)
        return actions

    def _refresh_inputs(self, store: SimStore) -> None:
        if not self.mapping:
            return
        _, values = store.read_batch(list(self.mapping.values()))
        for attr, point in self.mapping.items():
            pv = values[point]
            self.data_model[attr] = pv.value
            self.quality[attr] = pv.quality

    def _set_model(self, path: str, value: object) -> None:
        self.data_model[path] = value
        self.quality[path] = GOOD

    def _issue_trips(self, decisions, store: SimStore,
                     now_tick: int) -> list[Action]:
        actions: list[Action] = []
        ptrc = next((c for c in self.protections if c.kind == "PTRC"), None)
        tripped = [cfg for cfg, d in decisions if d == DECISION_TRIP]
        if ptrc is not None:
            any_trip = bool(tripped)
            self._set_model(f"{self.name}.{ptrc.ln_name}.Op.general", any_trip)
            if any_trip and ptrc.target_cb:
                actions.append(self._open_breaker(
                    ptrc, store, now_tick,
                    note=",".join(c.ln_name for c in tripped)))
            return actions
        for cfg in tripped:
            if cfg.target_cb:
                actions.append(self._open_breaker(cfg, store, now_tick))
        return actions

    def _open_breaker(self, cfg: ProtectionConfig, store: SimStore,
                      now_tick: int, note: str = "") -> Action:
        store.write_control(cfg.target_cb, False, actor="ied")
        self._mirror_point(cfg.target_cb, False)
        return Action(now_tick, self.name, "trip", cfg.ln_name,
                      value=cfg.target_cb, note=note)

    def _run_interlock(self, cfg: ProtectionConfig, store: SimStore,
                       now_tick: int) -> list[Action]:
        if not cfg.source_cb or not cfg.local_state or not cfg.target_cb:
            return []
        heard = self.data_model.get(cfg.source_cb)
        if heard is None:
            return []  # nothing heard from the partner yet
        wanted = bool(heard)
        local = self.data_model.get(cfg.local_state)
        current = wanted if local is None else bool(local)
        if wanted == current:
            return []
        store.write_control(cfg.target_cb, wanted, actor="ied")
        self._mirror_point(cfg.target_cb, wanted)
        return [Action(now_tick, self.name, "interlock", cfg.ln_name,
                       value=wanted, note=f"mirror {cfg.source_cb}")]

    def _mirror_point(self, point: str, value: object) -> None:
        attr = self.point_of.get(point)
        if attr is not None:
            self._set_model(attr, value)

    # -- publications --------------------------------------------------------

    def _publish_due(self, now_tick: int) -> list[Action]:
        actions: list[Action] = []
        for pub in self.publications:
            entries = [[m, self.data_model.get(m, 0.0)] for m in pub.members]
            changed = entries != pub.last_entries
            due = now_tick - pub.last_publish_tick >= pub.interval_ticks
            if not changed and not due:
                continue
            msg = self.goose_publish(pub.control_block, changed)
            pub.last_entries = entries
            pub.last_publish_tick = now_tick
            self._transmit(pub, msg)
            actions.append(Action(now_tick, self.name, "publish",
                                  pub.control_block,
                                  value=[msg.stnum, msg.sqnum],
                                  note="change" if changed else "heartbeat"))
        return actions

    def goose_publish(self, control_block: str, changed: bool) -> GooseMessage:
        pub = next(p for p in self.publications
                   if p.control_block == control_block)
        if changed:
            pub.stnum = 1 if pub.stnum >= STNUM_MAX else pub.stnum + 1
            pub.sqnum = 0
        else:
            pub.sqnum += 1
        entries = [[m, self.data_model.get(m, 0.0)] for m in pub.members]
        return GooseMessage(app_id=pub.app_id, dataset=pub.dataset,
                            stnum=pub.stnum, sqnum=pub.sqnum,
                            entries=entries,
                            transport="routable" if pub.kind == RGOOSE
                            else "l2")

    def _transmit(self, pub: Publication, msg: GooseMessage) -> None:
        if self.emulator is None:
            return
        if msg.transport == "routable":
            kind = UDP_MULTICAST
            dst = multicast_group(pub.app_id)
        else:
            kind = L2_MULTICAST
            dst = f"01-0C-CD-01-{pub.app_id >> 8 & 0xFF:02X}-{pub.app_id & 0xFF:02X}"
        self.emulator.send_frame(Frame(kind=kind, src=self.name, dst=dst,
                                       payload=msg.to_payload(),
                                       app_id=pub.app_id))

    # -- subscription side -------------------------------------------------------

    def goose_accept(self, msg: GooseMessage, now_tick: int = 0) -> str:
        sub = self.subscriptions.get(msg.app_id)
        if sub is None:
            return REJECTED_STALE
        if msg.stnum < sub.last_accepted_stnum:
            silent_for = now_tick - sub.last_accept_tick
            if silent_for < RESYNC_PUBLISH_INTERVALS * sub.publish_interval:
                return REJECTED_STALE
            # long silence: counter resynchronization
        sub.last_accepted_stnum = msg.stnum
        sub.last_accept_tick = now_tick
        for path, value in msg.entries:
            self._set_model(path, value)
        return ACCEPTED

    # -- request serving --------------------------------------------------------

    def serve_request(self, req: dict, actor: str = "scada") -> dict:
        op = req.get("op")
        path = req.get("path", "")
        try:
            if op == "read":
                if path not in self.data_model:
                    raise NoSuchPath(path)
                return {"ok": True, "value": self.data_model[path],
                        "quality": self.quality.get(path, GOOD)}
            if op == "write":
                return self._serve_write(path, req.get("value"), actor)
            return {"ok": False, "error": f"unknown op {op!r}"}
        except NoSuchPath:
            return {"ok": False, "error": "NoSuchPath"}
        except NotWritable:
            return {"ok": False, "error": "NotWritable"}

    def _serve_write(self, path: str, value: object, actor: str) -> dict:
        if path not in self.data_model:
            raise NoSuchPath(path)
        if path not in self._writable_attrs:
            raise NotWritable(path)
        point = self.mapping.get(path)
        if point is not None and self.store is not None:
            self.store.write_control(point, bool(value), actor=actor)
        self._set_model(path, bool(value))
        return {"ok": True, "value": bool(value)}

    def handle_frame(self, frame: Frame, time_ms: float,
                     now_tick: int = 0) -> None:
        """net_emu callback: answer requests, ingest state messages."""
        if frame.kind in (L2_MULTICAST, UDP_MULTICAST):
            transport = "routable" if frame.kind == UDP_MULTICAST else "l2"
            msg = GooseMessage.from_payload(frame.payload, transport)
            verdict = self.goose_accept(msg, now_tick)
            self.goose_log.append((now_tick, msg.app_id, msg.stnum, verdict))
            return
        requests, _ = decode_messages(frame.payload)
        actor = self._actor_of(frame.src)
        for req in requests:
            response = self.serve_request(req, actor=actor)
            if self.emulator is not None:
                self.emulator.send_frame(Frame(
                    kind=frame.kind, src=self.name, dst=frame.src,
                    payload=encode_message(response)))

    def _actor_of(self, node_name: str) -> str:
        if self.emulator is None:
            return "scada"
        node = self.emulator.topology.node(node_name)
        if node is None:
            return "scada"
        return {"plc": "plc", "gateway": "scada",
                "attacker": "attacker"}.get(node.kind, "ied")


def multicast_group(app_id: int) -> str:
    return f"224.0.{app_id >> 8 & 0xFF}.{app_id & 0xFF}"


def eval_protection(cfg: ProtectionConfig, values: dict) -> str:
    """Definite-time decision for one protection function."""
    scale = _THRESHOLD_UNIT_SCALE.get(cfg.units, 1.0)

    def read(path: str) -> float:
        value = values.get(path)
        if value is None:
            raise MissingValue(f"{cfg.ln_name} input {path!r} absent")
        return abs(float(value))

    if cfg.kind in ("PTOC", "PTOV"):
        magnitude = max(read(p) for p in cfg.monitored)
        return _over_decision(magnitude, cfg, scale)
    if cfg.kind == "PTUV":
        magnitude = min(read(p) for p in cfg.monitored)
        # Dead-line supervision: a de-energized feeder reads near zero
        # volts, which is loss of supply rather than undervoltage, and
        # must not keep retripping an already open breaker.
        bounds = [t for t in (cfg.alarm_threshold, cfg.trip_threshold)
                  if t is not None]
        if bounds and magnitude < 0.1 * scale * min(bounds):
            return DECISION_NONE
        return _under_decision(magnitude, cfg, scale)
    if cfg.kind == "PDIF":
        local = max(read(p) for p in cfg.monitored)
        if cfg.partner_current is None:
            raise MissingValue(f"{cfg.ln_name} has no partner current")
        spill = abs(local - read(cfg.partner_current))
        return _over_decision(spill, cfg, scale)
    if cfg.kind == "PDIS":
        voltage = read(cfg.monitored[0])
        current = read(cfg.monitored[1])
        if current <= cfg.min_pickup:
            return DECISION_NONE
        impedance = voltage / current
        zone = cfg.zone_impedance_ohm
        if zone is not None and impedance < zone:
            return DECISION_TRIP
        if cfg.alarm_threshold is not None \
                and impedance < cfg.alarm_threshold:
            return DECISION_ALARM
        return DECISION_NONE
    if cfg.kind == "PTRC":
        return DECISION_TRIP if values.get("any_trip") else DECISION_NONE
    if cfg.kind == "CILO":
        if cfg.source_cb is None or cfg.local_state is None:
            return DECISION_NONE
        heard = values.get(cfg.source_cb)
        if heard is None:
            return DECISION_NONE
        wanted = bool(heard)
        local = values.get(cfg.local_state)
        current = wanted if local is None else bool(local)
        return DECISION_TRIP if wanted != current else DECISION_NONE
    raise MissingValue(f"unknown protection kind {cfg.kind!r}")


def _over_decision(value: float, cfg: ProtectionConfig, scale: float) -> str:
    trip = cfg.trip_threshold * scale if cfg.trip_threshold is not None else None
    alarm = cfg.alarm_threshold * scale if cfg.alarm_threshold is not None else None
    if trip is not None and value > trip:
        return DECISION_TRIP
    if alarm is not None and value > alarm:
        return DECISION_ALARM
    return DECISION_NONE


def _under_decision(value: float, cfg: ProtectionConfig, scale: float) -> str:
    trip = cfg.trip_threshold * scale if cfg.trip_threshold is not None else None
    alarm = cfg.alarm_threshold * scale if cfg.alarm_threshold is not None else None
    if trip is not None and value < trip:
        return DECISION_TRIP
    if alarm is not None and value < alarm:
        return DECISION_ALARM
    return DECISION_NONE


def instantiate_ied(doc: SclDocument, mapping: SupplementDoc | None,
                    thresholds: SupplementDoc | None,
                    ied_name: str | None = None,
                    server_port: int = 10102) -> VirtualIed:
    """Assemble one virtual device from its description and supplements.

    Raises MissingThreshold when a protection logical node has no
    settings entry (or a differential one lacks its partner quantity),
    and UnmappedAttribute when a dataset member neither maps to a store
    point nor lives under one of the device's own status classes.
    """
    if ied_name is None:
        if len(doc.ieds) != 1:
            raise UnmappedAttribute(
                "document holds several devices; name the one to build")
        section = doc.ieds[0]
    else:
        section = doc.find_ied(ied_name)
        if section is None:
            raise UnmappedAttribute(f"no device named {ied_name!r}")
    ied = VirtualIed(section.name, server_port=server_port)

    for entry in (mapping.mappings if mapping else []):
        first = split_attribute_path(entry.attribute_path)[0]
        if first != section.name:
            continue
        ied.mapping[entry.attribute_path] = entry.physical_path
        ied.point_of[entry.physical_path] = entry.attribute_path
        ied._ensure_path(entry.attribute_path,
                         False if _quantity_of(entry.physical_path)
                         in ("pos", "closed") else 0.0)
        if _quantity_of(entry.physical_path) in ("pos", "closed"):
            ied._writable_attrs.add(entry.attribute_path)

    by_ln = {}
    for t in (thresholds.thresholds if thresholds else []):
        if t.ied == section.name:
            by_ln[(t.ln_class, t.instance)] = t

    for ld in section.logical_devices:
        for ln in ld.logical_nodes:
            if ln.ln_class in ("XCBR", "CSWI"):
                ied._ensure_path(f"{section.name}.{ln.token}.Pos.stVal",
                                 False)
            if ln.ln_class not in PROTECTION_CLASSES:
                continue
            entry = by_ln.get((ln.ln_class, ln.instance))
            if entry is None:
                raise MissingThreshold(
                    f"{section.name}.{ln.token} has no settings")
            ied.protections.append(
                _protection_from_entry(ied, section.name, ln.ln_class,
                                       ln.instance, entry))

    _wire_publications(ied, section)
    _check_dataset_members(ied, section)
    return ied


def _protection_from_entry(ied: VirtualIed, name: str, ln_class: str,
                           inst: int, entry) -> ProtectionConfig:
    extra = entry.extra
    alarm, trip = entry.alarm_threshold, entry.trip_threshold
    if alarm is not None and trip is not None:
        if ln_class in UNDER_FUNCTIONS and alarm < trip:
            raise SchemaViolation(
                f"{name}.{ln_class}{inst}: under-function alarm level "
                "must sit above the trip level")
        if ln_class in OVER_FUNCTIONS and alarm > trip:
            raise SchemaViolation(
                f"{name}.{ln_class}{inst}: alarm level must not exceed "
                "the trip level")
    monitored = extra.get("monitored", "").split()
    if not monitored and ln_class not in ("PTRC", "CILO"):
        monitored = _default_monitored(ied, name, ln_class)
        if not monitored:
            raise MissingThreshold(
                f"{name}.{ln_class}{inst} has nothing to monitor")
    target_cb = extra.get("target_cb")
    if target_cb is not None and "." not in target_cb:
        target_cb = f"{target_cb}.pos"  # bare component name
    if target_cb is None and ln_class != "CILO":
        target_cb = _default_breaker_point(ied)
    partner = extra.get("partner_current")
    if ln_class == "PDIF" and not partner:
        raise MissingThreshold(
            f"{name}.PDIF{inst} needs a partner current path")
    source_cb = extra.get("source_cb")
    local_state = extra.get("local_state")
    if ln_class == "CILO":
        if not source_cb:
            raise MissingThreshold(
                f"{name}.CILO{inst} needs the watched breaker path")
        if target_cb is None:
            target_cb = _default_breaker_point(ied)
        if local_state is None and target_cb is not None:
            local_state = ied.point_of.get(target_cb)
        if target_cb is None or local_state is None:
            raise MissingThreshold(
                f"{name}.CILO{inst} has no local breaker to drive")
        ied._ensure_path(source_cb, None)
    zone = extra.get("zone_impedance_ohm")
    if ln_class == "PDIS" and zone is None:
        raise MissingThreshold(f"{name}.PDIS{inst} needs a zone impedance")
    if ln_class == "PDIS" and len(monitored) != 2:
        raise MissingThreshold(
            f"{name}.PDIS{inst} monitors a voltage and a current path")
    if partner:
        ied._ensure_path(partner, None)
    cfg = ProtectionConfig(
        kind=ln_class, instance=inst, monitored=monitored,
        alarm_threshold=entry.alarm_threshold,
        trip_threshold=entry.trip_threshold,
        target_cb=target_cb, units=entry.units,
        zone_impedance_ohm=float(zone) if zone is not None else None,
        partner_current=partner, source_cb=source_cb,
        local_state=local_state,
        min_pickup=float(extra.get("min_pickup", 0.05)))
    for path in cfg.monitored:
        # local paths refresh from the store every scan; paths fed by
        # subscriptions stay unknown until a publication lands
        local = split_attribute_path(path)[0] == ied.name
        ied._ensure_path(path, 0.0 if local else None)
    return cfg


def _default_monitored(ied: VirtualIed, name: str, ln_class: str) -> list[str]:
    wanted = {"PTOC": ("i_ka",), "PTOV": ("v_kv", "vm_pu"),
              "PTUV": ("v_kv", "vm_pu"), "PDIF": ("i_ka",),
              "PDIS": ("v_kv", "i_ka")}.get(ln_class, ())
    picks: list[str] = []
    for quantity in wanted:
        for attr, point in sorted(ied.mapping.items()):
            if split_attribute_path(attr)[0] == name \
                    and _quantity_of(point) == quantity:
                picks.append(attr)
                break
    return picks


def _default_breaker_point(ied: VirtualIed) -> str | None:
    for attr, point in sorted(ied.mapping.items()):
        if _ln_class_of(attr) in ("XCBR", "CSWI") \
                and _quantity_of(point) in ("pos", "closed"):
            return point
    return None


def _wire_publications(ied: VirtualIed, section) -> None:
    datasets = {ds.name: ds for ds in section.datasets}
    for cb in section.control_blocks:
        if cb.kind not in (GOOSE, RGOOSE):
            continue
        ds = datasets.get(cb.dataset_ref)
        if ds is None:
            continue  # validate_bundle reports unresolved references
        ied.publications.append(Publication(
            control_block=cb.name, kind=cb.kind, app_id=cb.app_id,
            dataset=cb.dataset_ref, members=list(ds.members)))


def _check_dataset_members(ied: VirtualIed, section) -> None:
    for ds in section.datasets:
        for member in ds.members:
            if member in ied.data_model:
                continue
            if split_attribute_path(member)[0] == section.name \
                    and _ln_class_of(member) in _INTERNAL_CLASSES:
                ied._ensure_path(member, False)
                continue
            raise UnmappedAttribute(
                f"dataset {ds.name} member {member} has no mapping "
                "and no internal source")
