"""Deterministic stepping engine for a compiled range.

Each tick solves the electrical state, publishes measurements into the
shared store, scans every protection device and controller, moves the
network emulation forward, and appends one canonical JSON line to the
run log.  Two runs from the same specification produce byte-identical
logs; an adversary script changes the log from its first active tick
onward and not before.
"""
from __future__ import annotations

import copy
import hashlib
import json
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .compile import RangeSpec
from .errors import SgcrError, XmlSyntax, SchemaViolation
from .ied_runtime import GooseMessage, multicast_group
from .net_emu import (Frame, L2_MULTICAST, NetworkEmulator, UDP_MULTICAST)
from .plc_runtime import PlcActor
from .power_model import apply_timestep, solve_power_flow
from .sim_store import SimStore

_JSON = {"sort_keys": True, "separators": (",", ":")}


def _dumps(obj: dict) -> str:
    return json.dumps(obj, **_JSON)


class RunLog:
    """Newline-delimited JSON account of one run."""

    def __init__(self, lines: list[str] | None = None):
        self.lines: list[str] = lines or []

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + "\n"

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()

    def append(self, record: dict) -> None:
        self.lines.append(_dumps(record))

    def records(self, of_type: str | None = None) -> list[dict]:
        out = []
        for line in self.lines:
            rec = json.loads(line)
            if of_type is None or rec.get("type") == of_type:
                out.append(rec)
        return out

    def ticks(self) -> list[dict]:
        return self.records("tick")

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.text)

    @staticmethod
    def load(path: str) -> "RunLog":
        with open(path, encoding="utf-8") as fh:
            return RunLog(fh.read().splitlines())


def first_divergence(a: RunLog, b: RunLog) -> int | None:
    """Tick where two run logs first differ, None when they match.

    Only per-tick records are compared, so the header naming the
    adversary script does not count as a difference.
    """
    ticks_a, ticks_b = a.ticks(), b.ticks()
    for ra, rb in zip(ticks_a, ticks_b):
        if ra != rb:
            return ra["t"]
    if len(ticks_a) != len(ticks_b):
        return min(len(ticks_a), len(ticks_b))
    return None


# -- adversary scripts --------------------------------------------------------


@dataclass
class AttackEvent:
    tick: int
    kind: str  # inject_goose | store_write | drop_link
    path: str = ""
    value: object = None
    cable: str = ""
    app_id: int = 0
    src: str = ""
    dataset: str = ""
    stnum: int = 0
    sqnum: int = 0
    entries: list = field(default_factory=list)
    transport: str = "routable"


@dataclass
class AttackScript:
    """Attachment point plus a timed list of adversary events."""

    name: str = "adversary"
    attach_name: str | None = None
    attach_to: str | None = None
    ip: str = ""
    taps: list[str] = field(default_factory=list)
    events: list[AttackEvent] = field(default_factory=list)

    def events_at(self, tick: int) -> list[AttackEvent]:
        return [e for e in self.events if e.tick == tick]

    def first_tick(self) -> int | None:
        return min((e.tick for e in self.events), default=None)


def _parse_value(raw: str) -> object:
    lowered = raw.strip().lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    return float(raw)


def parse_attack_script(text: str) -> AttackScript:
    """Read an adversary script from its XML form."""
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise XmlSyntax(str(exc)) from exc
    if root.tag != "AttackScript":
        raise SchemaViolation(f"expected AttackScript, got {root.tag!r}")
    script = AttackScript(name=root.get("name", "adversary"))
    for el in root:
        if el.tag == "Attach":
            script.attach_name = el.get("name", "INTRUDER")
            script.attach_to = el.get("node")
            script.ip = el.get("ip", "")
            if not script.attach_to:
                raise SchemaViolation("Attach needs a node to attach to")
        elif el.tag == "Tap":
            scope = el.get("scope")
            if not scope:
                raise SchemaViolation("Tap needs a scope")
            script.taps.append(scope)
        elif el.tag == "InjectGoose":
            entries = [[e.get("path"), _parse_value(e.get("value", "0"))]
                       for e in el.findall("Entry")]
            script.events.append(AttackEvent(
                tick=int(el.get("tick", "0")),
                kind="inject_goose",
                app_id=int(el.get("app_id", "0"), 0),
                src=el.get("src", ""),
                dataset=el.get("dataset", ""),
                stnum=int(el.get("stnum", "0")),
                sqnum=int(el.get("sqnum", "0")),
                entries=entries,
                transport=el.get("transport", "routable")))
        elif el.tag == "StoreWrite":
            script.events.append(AttackEvent(
                tick=int(el.get("tick", "0")), kind="store_write",
                path=el.get("path", ""),
                value=_parse_value(el.get("value", "0"))))
        elif el.tag == "DropLink":
            script.events.append(AttackEvent(
                tick=int(el.get("tick", "0")), kind="drop_link",
                cable=el.get("cable", "")))
        else:
            raise SchemaViolation(f"unknown adversary element {el.tag!r}")
    return script


def serialize_attack_script(script: AttackScript) -> str:
    lines = [f'<AttackScript name="{script.name}">']
    if script.attach_to:
        lines.append(f'  <Attach name="{script.attach_name or "INTRUDER"}" '
                     f'node="{script.attach_to}" ip="{script.ip}"/>')
    for scope in script.taps:
        lines.append(f'  <Tap scope="{scope}"/>')
    for ev in script.events:
        if ev.kind == "inject_goose":
            lines.append(f'  <InjectGoose tick="{ev.tick}" '
                         f'app_id="0x{ev.app_id:04X}" src="{ev.src}" '
                         f'dataset="{ev.dataset}" stnum="{ev.stnum}" '
                         f'sqnum="{ev.sqnum}" transport="{ev.transport}">')
            for path, value in ev.entries:
                text = str(value).lower() if isinstance(value, bool) else value
                lines.append(f'    <Entry path="{path}" value="{text}"/>')
            lines.append("  </InjectGoose>")
        elif ev.kind == "store_write":
            value = ev.value
            text = str(value).lower() if isinstance(value, bool) else value
            lines.append(f'  <StoreWrite tick="{ev.tick}" path="{ev.path}" '
                         f'value="{text}"/>')
        elif ev.kind == "drop_link":
            lines.append(f'  <DropLink tick="{ev.tick}" cable="{ev.cable}"/>')
    lines.append("</AttackScript>")
    return "\n".join(lines) + "\n"


def _find_publication(spec: RangeSpec, app_id: int):
    for name in sorted(spec.ieds):
        for pub in spec.ieds[name].publications:
            if pub.app_id == app_id:
                return name, pub
    raise SgcrError(f"no publication uses application id 0x{app_id:04X}")


def _default_attach(spec: RangeSpec) -> str:
    switches = sorted(n for n, node in spec.topology.nodes.items()
                      if node.kind == "switch")
    if not switches:
        raise SgcrError("topology has no switch to attach to")
    return switches[0]


def make_fci_stnum_attack(spec: RangeSpec, app_id: int, tick: int,
                          stnum: int = 1000, claim_value: bool = False,
                          attach_to: str | None = None,
                          ip: str = "10.99.0.66") -> AttackScript:
    """Forged state message claiming a breaker position, counter far ahead.

    The inflated status number makes subscribers treat the forgery as
    newest and reject the true publisher as stale until resync.
    """
    publisher, pub = _find_publication(spec, app_id)
    entries = [[member, claim_value] for member in pub.members]
    return AttackScript(
        name=f"fci-stnum-0x{app_id:04X}",
        attach_name="INTRUDER",
        attach_to=attach_to or _default_attach(spec),
        ip=ip,
        events=[AttackEvent(
            tick=tick, kind="inject_goose", app_id=app_id, src=publisher,
            dataset=pub.dataset, stnum=stnum, sqnum=0, entries=entries,
            transport="routable" if pub.kind == "RGOOSE" else "l2")])


def make_fdi_attack(spec: RangeSpec, tick: int, path: str,
                    value: object) -> AttackScript:
    """Direct falsification of one stored value (compromised database)."""
    if path not in spec.registrations:
        raise SgcrError(f"no point {path!r} to falsify")
    return AttackScript(
        name=f"fdi-{path}",
        events=[AttackEvent(tick=tick, kind="store_write",
                            path=path, value=value)])


# -- kernel --------------------------------------------------------------------


class RangeKernel:
    """Owns one run: fresh store, emulator, and actors per instance."""

    def __init__(self, spec: RangeSpec, tick_ms: float = 100.0,
                 attack: AttackScript | None = None, record: bool = True):
        self.spec = spec
        self.tick_ms = tick_ms
        self.attack = attack
        self.record = record
        self.tick = 0
        self.log = RunLog()

        self.store = SimStore()
        for path in sorted(spec.registrations):
            reg = spec.registrations[path]
            self.store.register_point(path, writable=reg.writable,
                                      kind=reg.kind)
        for path in sorted(spec.registrations):
            self.store.write_measurement_value(
                path, spec.registrations[path].initial)
        self.store.commit_tick()

        self.emulator = NetworkEmulator(copy.deepcopy(spec.topology))
        self.ieds = {name: copy.deepcopy(spec.ieds[name])
                     for name in sorted(spec.ieds)}
        for name, ied in self.ieds.items():
            ied.attach(self.store, self.emulator)
            self.emulator.register_handler(name, self._ied_handler(ied))
            for app_id in ied.subscriptions:
                self.emulator.subscribe(name, app_id)
        self.plcs = {name: PlcActor(name,
                                    copy.deepcopy(spec.plc_programs[name]),
                                    self.emulator)
                     for name in sorted(spec.plc_programs)}
        for name, plc in self.plcs.items():
            self.emulator.register_handler(name, plc.handle_frame)

        self.taps = []
        if attack is not None:
            if attack.attach_to:
                self.emulator.add_attacker(attack.attach_name or "INTRUDER",
                                           attack.attach_to, attack.ip)
            for scope in attack.taps:
                self.taps.append(self.emulator.attach_tap(scope))

        self._goose_seen = {name: 0 for name in self.ieds}
        self._plc_seen = {name: 0 for name in self.plcs}
        self._injected_seen = 0

    def _ied_handler(self, ied):
        def handler(frame, time_ms):
            ied.handle_frame(frame, time_ms, now_tick=self.tick)
        return handler

    # -- one tick ---------------------------------------------------------

    def _apply_schedules(self) -> None:
        for point in sorted(self.spec.schedules):
            seq = self.spec.schedules[point]
            idx = min(self.tick, len(seq) - 1)
            if self.tick == 0:
                previous = bool(self.spec.registrations[point].initial)
            else:
                previous = seq[min(self.tick - 1, len(seq) - 1)]
            if seq[idx] != previous:
                self.store.write_control(point, seq[idx], actor="scada")

    def _attack_store_writes(self) -> None:
        if self.attack is None:
            return
        for ev in self.attack.events_at(self.tick):
            if ev.kind == "store_write":
                self.store.write_control(ev.path, ev.value, actor="attacker")

    def _attack_network_events(self, base_ms: float) -> None:
        if self.attack is None:
            return
        for ev in self.attack.events_at(self.tick):
            if ev.kind == "drop_link":
                self.emulator.drop_link(ev.cable)
            elif ev.kind == "inject_goose":
                msg = GooseMessage(app_id=ev.app_id, dataset=ev.dataset,
                                   stnum=ev.stnum, sqnum=ev.sqnum,
                                   entries=[list(e) for e in ev.entries],
                                   transport=ev.transport)
                if ev.transport == "routable":
                    kind, dst = UDP_MULTICAST, multicast_group(ev.app_id)
                else:
                    kind = L2_MULTICAST
                    dst = (f"01-0C-CD-01-{ev.app_id >> 8 & 0xFF:02X}"
                           f"-{ev.app_id & 0xFF:02X}")
                frame = Frame(kind=kind, src=ev.src, dst=dst,
                              payload=msg.to_payload(), app_id=ev.app_id)
                self.emulator.inject_frame(
                    self.attack.attach_name or "INTRUDER", frame,
                    at_ms=base_ms + 0.8 * self.tick_ms)

    def _switch_status(self) -> dict[str, bool]:
        status = {}
        for sw in self.spec.network.switches:
            status[sw.id] = bool(self.store.effective_value(f"{sw.id}.pos"))
        return status

    def _store_digest(self) -> str:
        snap = self.store.snapshot()
        canon = {path: [pv.value, pv.quality, pv.written_by]
                 for path, pv in snap.values.items()}
        return hashlib.sha256(_dumps(canon).encode()).hexdigest()

    def _new_goose(self) -> list[list]:
        out = []
        for name in sorted(self.ieds):
            log = self.ieds[name].goose_log
            for entry in log[self._goose_seen[name]:]:
                _tick, app_id, stnum, verdict = entry
                out.append([name, app_id, stnum, verdict])
            self._goose_seen[name] = len(log)
        return out

    def _new_plc(self) -> list[dict]:
        out = []
        for name in sorted(self.plcs):
            log = self.plcs[name].log
            out.extend(e.as_dict() for e in log[self._plc_seen[name]:])
            self._plc_seen[name] = len(log)
        return out

    def step(self) -> dict:
        base = self.tick * self.tick_ms
        step_idx = min(self.tick, self.spec.n_steps - 1)

        self._apply_schedules()
        switch_status = self._switch_status()
        net_t = apply_timestep(self.spec.network, step_idx, switch_status)
        solution = solve_power_flow(net_t)
        self.store.write_measurements(solution, self.spec.bindings)
        self._attack_store_writes()
        self.store.commit_tick()

        delivered = self.emulator.run_until(base)
        actions = []
        for name in sorted(self.ieds):
            actions.extend(self.ieds[name].scan_cycle(self.store, self.tick))
        delivered += self.emulator.run_until(base + 0.4 * self.tick_ms)
        for name in sorted(self.plcs):
            self.plcs[name].begin_scan(self.tick)
        delivered += self.emulator.run_until(base + 0.7 * self.tick_ms)
        for name in sorted(self.plcs):
            self.plcs[name].finish_scan(self.tick)
        self._attack_network_events(base)
        delivered += self.emulator.run_until(base + self.tick_ms)

        injected = len(self.emulator.injection_log) - self._injected_seen
        self._injected_seen = len(self.emulator.injection_log)

        record = {
            "type": "tick",
            "t": self.tick,
            "bus_vm": {str(b): round(s.vm_pu, 9)
                       for b, s in sorted(solution.buses.items())},
            "switches": {k: v for k, v in sorted(switch_status.items())},
            "actions": [a.as_dict() for a in actions],
            "goose": self._new_goose(),
            "plc": self._new_plc(),
            "delivered": delivered,
            "injected": injected,
            "store": self._store_digest(),
        }
        if self.record:
            self.log.append(record)
        self.tick += 1
        return record

    def run(self, steps: int, realtime: bool = False) -> RunLog:
        self.log.append({
            "type": "meta",
            "ticks": steps,
            "tick_ms": self.tick_ms,
            "devices": len(self.ieds),
            "plcs": sorted(self.plcs),
            "points": len(self.spec.registrations),
            "attack": self.attack.name if self.attack else None,
        })
        for _ in range(steps):
            started = time.monotonic()
            self.step()
            if realtime:
                remaining = self.tick_ms / 1000.0 - (time.monotonic() - started)
                if remaining > 0:
                    time.sleep(remaining)
        audit = self.store.audit_log()
        canon = [[e.tick, e.path, e.value, e.actor] for e in audit]
        self.log.append({
            "type": "audit",
            "writes": len(audit),
            "sha": hashlib.sha256(_dumps({"a": canon}).encode()).hexdigest(),
        })
        self.log.append({"type": "end", "t": steps})
        return self.log


def run_range(spec: RangeSpec, steps: int | None = None,
              tick_ms: float = 100.0, attack: AttackScript | None = None,
              realtime: bool = False) -> RunLog:
    """Run a compiled range for a number of ticks and return its log.

    The specification itself is never mutated, so repeated calls with
    the same arguments give byte-identical logs.
    """
    kernel = RangeKernel(spec, tick_ms=tick_ms, attack=attack)
    return kernel.run(spec.n_steps if steps is None else steps,
                      realtime=realtime)


@dataclass
class AttackRun:
    """Paired baseline and adversary runs over one specification."""

    script: AttackScript
    baseline: RunLog
    attacked: RunLog

    @property
    def divergence_tick(self) -> int | None:
        return first_divergence(self.baseline, self.attacked)


def run_attack_fci_stnum(spec: RangeSpec, app_id: int, tick: int,
                         steps: int | None = None, stnum: int = 1000,
                         claim_value: bool = False,
                         tick_ms: float = 100.0) -> AttackRun:
    """False command injection: forge a breaker-state publication."""
    script = make_fci_stnum_attack(spec, app_id, tick, stnum=stnum,
                                   claim_value=claim_value)
    baseline = run_range(spec, steps=steps, tick_ms=tick_ms)
    attacked = run_range(spec, steps=steps, tick_ms=tick_ms, attack=script)
    return AttackRun(script=script, baseline=baseline, attacked=attacked)


def run_attack_fdi(spec: RangeSpec, path: str, value: object, tick: int,
                   steps: int | None = None,
                   tick_ms: float = 100.0) -> AttackRun:
    """False data injection: falsify one stored measurement."""
    script = make_fdi_attack(spec, tick, path, value)
    baseline = run_range(spec, steps=steps, tick_ms=tick_ms)
    attacked = run_range(spec, steps=steps, tick_ms=tick_ms, attack=script)
    return AttackRun(script=script, baseline=baseline, attacked=attacked)
