"""Shared point database coupling the solver and the cyber side.

Every physical quantity lives under a dotted point path such as
``Load0.Voltage.phsA`` or ``CB3.Pos``.  The solver publishes
measurements, devices and operators write control points, and everyone
reads from immutable committed snapshots: writes land in a pending area
that becomes visible only at the next tick commit, so readers never
observe a half-written tick.  Every write is appended to an audit log
with actor provenance; folding the log over the initial state
reproduces any committed snapshot.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping

from .errors import ReadOnlyPoint, UnregisteredPoint

ACTORS = ("solver", "ied", "plc", "scada", "attacker")

GOOD = "good"
INVALID = "invalid"


@dataclass(frozen=True)
class PointValue:
    value: float | bool
    quality: str
    written_by: str
    at_tick: int


@dataclass(frozen=True)
class StoreSnapshot:
    tick: int
    values: Mapping[str, PointValue]


@dataclass(frozen=True)
class AuditEntry:
    tick: int
    path: str
    value: float | bool
    actor: str

    def as_json(self) -> str:
        return json.dumps(
            {"tick": self.tick, "path": self.path, "value": self.value,
             "actor": self.actor},
            sort_keys=True, separators=(",", ":"))


@dataclass
class MeasurementBinding:
    """How one point is extracted from a flow solution.

    ``source`` selects the extractor; ``ref`` is a bus id, component
    name, or switch id depending on the source; ``nominal_kv`` feeds
    the unit conversions that need a voltage base.
    """

    point: str
    source: str
    ref: str | int
    nominal_kv: float | None = None


_SQRT3 = math.sqrt(3.0)


def _find_named(items, name: str):
    for item in items:
        if item.name == name:
            return item
    return None


def _machine_i_ka(machine, solution, nominal_kv: float) -> float:
    state = solution.buses.get(machine.bus)
    if state is None or state.vm_pu == 0 or not nominal_kv:
        return 0.0
    v_ll = state.vm_pu * nominal_kv
    s_mva = math.hypot(machine.p_mw, machine.q_mvar)
    return s_mva / (_SQRT3 * v_ll)


def extract_measurement(solution, binding: MeasurementBinding) -> float | bool:
    """Pull one value out of a FlowSolution; UnregisteredPoint if absent."""
    src = binding.source
    if src in ("bus_v_ln_kv", "bus_vm_pu"):
        state = solution.buses.get(int(binding.ref))
        if state is None:
            raise UnregisteredPoint(f"solution has no bus {binding.ref!r}")
        if src == "bus_vm_pu":
            return state.vm_pu
        if binding.nominal_kv is None:
            raise UnregisteredPoint(f"binding {binding.point} lacks nominal_kv")
        return state.vm_pu * binding.nominal_kv / _SQRT3
    if src.startswith("branch_"):
        branch = _find_named(solution.branches, str(binding.ref))
        if branch is None:
            raise UnregisteredPoint(f"solution has no branch {binding.ref!r}")
        attr = src[len("branch_"):]
        return float(getattr(branch, attr))
    if src.startswith("gen_") or src.startswith("load_"):
        pool = solution.generators if src.startswith("gen_") else solution.loads
        machine = _find_named(pool, str(binding.ref))
        if machine is None:
            raise UnregisteredPoint(f"solution has no machine {binding.ref!r}")
        attr = src.split("_", 1)[1]
        if attr == "i_ka":
            if binding.nominal_kv is None:
                raise UnregisteredPoint(f"binding {binding.point} lacks nominal_kv")
            return _machine_i_ka(machine, solution, binding.nominal_kv)
        return float(getattr(machine, attr))
    if src == "switch_pos":
        if str(binding.ref) not in solution.switches:
            raise UnregisteredPoint(f"solution has no switch {binding.ref!r}")
        return bool(solution.switches[str(binding.ref)])
    raise UnregisteredPoint(f"unknown measurement source {src!r}")


@dataclass
class _Registration:
    writable: bool
    kind: str  # "real" or "bool"


class SimStore:
    """Snapshot-isolated point store with an append-only audit log."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._registry: dict[str, _Registration] = {}
        self._committed = StoreSnapshot(tick=0, values={})
        self._pending: dict[str, tuple[float | bool, str]] = {}
        self._tick_writes: list[tuple[str, float | bool, str]] = []
        self._audit: list[AuditEntry] = []

    # -- registration ---------------------------------------------------------

    def register_point(self, path: str, writable: bool = False,
                       kind: str = "real") -> None:
        if kind not in ("real", "bool"):
            raise ValueError(f"kind must be real or bool, got {kind!r}")
        with self._lock:
            existing = self._registry.get(path)
            if existing is not None:
                if existing.writable != writable or existing.kind != kind:
                    raise ValueError(f"point {path!r} re-registered with different flags")
                return
            self._registry[path] = _Registration(writable=writable, kind=kind)
            initial: float | bool = False if kind == "bool" else 0.0
            values = dict(self._committed.values)
            values[path] = PointValue(value=initial, quality=INVALID,
                                      written_by="solver", at_tick=self._committed.tick)
            self._committed = StoreSnapshot(tick=self._committed.tick, values=values)

    def registrations(self) -> dict[str, tuple[bool, str]]:
        with self._lock:
            return {p: (r.writable, r.kind) for p, r in self._registry.items()}

    def is_registered(self, path: str) -> bool:
        return path in self._registry

    def is_writable(self, path: str) -> bool:
        reg = self._registry.get(path)
        return bool(reg and reg.writable)

    # -- reads ------------------------------------------------------------------

    def snapshot(self) -> StoreSnapshot:
        return self._committed  # atomic reference read; snapshots are immutable

    def read_point(self, path: str) -> PointValue:
        if path not in self._registry:
            raise UnregisteredPoint(path)
        return self._committed.values[path]

    def read_batch(self, paths: Iterable[str]) -> tuple[int, dict[str, PointValue]]:
        """All values from one snapshot, with the snapshot's tick."""
        snap = self._committed
        out = {}
        for path in paths:
            if path not in snap.values:
                raise UnregisteredPoint(path)
            out[path] = snap.values[path]
        return snap.tick, out

    def effective_value(self, path: str) -> float | bool:
        """Pending write if one is staged, committed value otherwise.

        The stepping loop uses this so a breaker command issued in the
        current tick shapes the same tick's solve.
        """
        with self._lock:
            if path not in self._registry:
                raise UnregisteredPoint(path)
            if path in self._pending:
                return self._pending[path][0]
            return self._committed.values[path].value

    # -- writes -----------------------------------------------------------------

    def _stage(self, path: str, value: float | bool, actor: str) -> None:
        self._pending[path] = (value, actor)
        self._tick_writes.append((path, value, actor))

    def write_control(self, path: str, value: float | bool, actor: str) -> None:
        """Stage a device/operator write for the next commit.

        Writes to read-only points are rejected, except for the attacker
        actor: a compromised database is part of the threat model, and
        falsified measurements must be recordable with provenance.
        """
        if actor not in ACTORS:
            raise ValueError(f"unknown actor {actor!r}")
        with self._lock:
            reg = self._registry.get(path)
            if reg is None:
                raise UnregisteredPoint(path)
            if not reg.writable and actor != "attacker":
                raise ReadOnlyPoint(f"{path} is not writable (actor {actor})")
            if reg.kind == "bool":
                value = bool(value)
            else:
                value = float(value)
            self._stage(path, value, actor)

    def write_measurement_value(self, path: str, value: float | bool) -> None:
        """Stage one solver-owned value directly (bypasses writability)."""
        with self._lock:
            reg = self._registry.get(path)
            if reg is None:
                raise UnregisteredPoint(path)
            value = bool(value) if reg.kind == "bool" else float(value)
            self._stage(path, value, "solver")

    def write_measurements(self, solution, bindings: list[MeasurementBinding]) -> None:
        """Publish solver outputs into the pending tick (actor ``solver``)."""
        staged: list[tuple[str, float | bool]] = []
        for binding in bindings:
            if binding.point not in self._registry:
                raise UnregisteredPoint(binding.point)
            staged.append((binding.point, extract_measurement(solution, binding)))
        with self._lock:
            for path, value in staged:
                self._stage(path, value, "solver")

    # -- commits ------------------------------------------------------------------

    def commit_tick(self) -> StoreSnapshot:
        """Seal pending writes as the next snapshot and extend the audit log."""
        with self._lock:
            tick = self._committed.tick + 1
            values = dict(self._committed.values)
            for path, (value, actor) in self._pending.items():
                values[path] = PointValue(value=value, quality=GOOD,
                                          written_by=actor, at_tick=tick)
            for path, value, actor in self._tick_writes:
                self._audit.append(AuditEntry(tick=tick, path=path,
                                              value=value, actor=actor))
            self._pending = {}
            self._tick_writes = []
            snapshot = StoreSnapshot(tick=tick, values=values)
            self._committed = snapshot
            return snapshot

    # -- audit --------------------------------------------------------------------

    def audit_log(self) -> list[AuditEntry]:
        with self._lock:
            return list(self._audit)

    def save_audit(self, fh: IO[str]) -> None:
        for entry in self.audit_log():
            fh.write(entry.as_json() + "\n")

    @staticmethod
    def load_audit(fh: IO[str]) -> list[AuditEntry]:
        entries = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            entries.append(AuditEntry(tick=raw["tick"], path=raw["path"],
                                      value=raw["value"], actor=raw["actor"]))
        return entries

    @staticmethod
    def replay(registrations: dict[str, tuple[bool, str]],
               entries: Iterable[AuditEntry],
               upto_tick: int | None = None) -> StoreSnapshot:
        """Fold an audit log over a fresh store; event-sourcing oracle."""
        store = SimStore()
        for path, (writable, kind) in registrations.items():
            store.register_point(path, writable=writable, kind=kind)
        by_tick: dict[int, list[AuditEntry]] = {}
        max_tick = 0
        for entry in entries:
            if upto_tick is not None and entry.tick > upto_tick:
                continue
            by_tick.setdefault(entry.tick, []).append(entry)
            max_tick = max(max_tick, entry.tick)
        if upto_tick is not None:
            max_tick = upto_tick
        snapshot = store.snapshot()
        for tick in range(1, max_tick + 1):
            for entry in by_tick.get(tick, []):
                with store._lock:
                    store._stage(entry.path, entry.value, entry.actor)
            snapshot = store.commit_tick()
        return snapshot
