"""Turn a bundle of description files into a runnable range specification.

The compiler validates and merges the source documents, builds the
electrical network and the communication topology, instantiates every
protection device, wires state-message subscriptions, and derives the
point registrations and measurement bindings the stepping kernel needs.
All problems found along the way are aggregated into one CompileError
instead of failing at the first.
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field

from .errors import CompileError, SgcrError
from .merge import MergedModel, merge_bundle
from .net_emu import CyberTopology, build_cyber_topology
from .ied_runtime import VirtualIed, instantiate_ied
from .plc_runtime import PlcProgram, load_program
from .power_model import PowerNetwork, build_power_network
from .sim_store import MeasurementBinding
from .scl.documents import SclDocument
from .scl.parse import parse_scl
from .scl.supplements import (CP_MAPPING, PLC_PROGRAM, POWER_PARAMS,
                              SCADA_CONFIG, THRESHOLDS, ScadaPoint,
                              SupplementDoc, parse_supplement)
from .scl.validate import ValidationReport, validate_bundle

_SCL_EXTENSIONS = (".ssd", ".sed", ".scd", ".icd")
_ROOT_TAG = re.compile(r"<([A-Za-z][\w]*)")


@dataclass
class Bundle:
    """Parsed input documents, grouped by role."""

    ssds: list[SclDocument] = field(default_factory=list)
    seds: list[SclDocument] = field(default_factory=list)
    scds: list[SclDocument] = field(default_factory=list)
    icds: list[SclDocument] = field(default_factory=list)
    supplements: list[SupplementDoc] = field(default_factory=list)
    cable_table: dict[str, tuple[float, float]] | None = None
    source: str | None = None

    def scl_documents(self) -> list[SclDocument]:
        return self.ssds + self.seds + self.scds + self.icds

    def supplements_of(self, kind: str) -> list[SupplementDoc]:
        return [s for s in self.supplements if s.kind == kind]

    def supplement(self, kind: str) -> SupplementDoc | None:
        """Single document of a kind; several are folded into one."""
        docs = self.supplements_of(kind)
        if not docs:
            return None
        if len(docs) == 1:
            return docs[0]
        merged = SupplementDoc(kind=kind, base_mva=docs[0].base_mva,
                               source="+".join(d.source or "?" for d in docs))
        for doc in docs:
            merged.components.extend(doc.components)
            merged.mappings.extend(doc.mappings)
            merged.thresholds.extend(doc.thresholds)
            merged.points.extend(doc.points)
        return merged


def _parse_cable_table(text: str) -> dict[str, tuple[float, float]]:
    raw = json.loads(text)
    table = {}
    for name, entry in raw.items():
        table[name] = (float(entry["r_ohm_per_km"]),
                       float(entry["x_ohm_per_km"]))
    return table


def load_bundle_files(files: dict[str, str],
                      source: str | None = None) -> Bundle:
    """Classify already-read file contents by extension and root tag."""
    bundle = Bundle(source=source)
    groups = {"SSD": bundle.ssds, "SED": bundle.seds,
              "SCD": bundle.scds, "ICD": bundle.icds}
    for name in sorted(files):
        text = files[name]
        ext = os.path.splitext(name)[1].lower()
        if ext in _SCL_EXTENSIONS:
            doc = parse_scl(text, ext[1:].upper(), source=name)
            groups[doc.kind].append(doc)
        elif ext == ".xml":
            match = _ROOT_TAG.search(text)
            if match is None:
                raise SgcrError(f"{name}: no recognizable root element")
            sup = parse_supplement(text, match.group(1))
            sup.source = sup.source or name
            bundle.supplements.append(sup)
        elif ext == ".json":
            table = _parse_cable_table(text)
            if bundle.cable_table is None:
                bundle.cable_table = {}
            bundle.cable_table.update(table)
        else:
            raise SgcrError(f"{name}: unsupported bundle file type {ext!r}")
    return bundle


def load_bundle_dir(path: str) -> Bundle:
    """Read every bundle file in a directory (not recursive)."""
    files: dict[str, str] = {}
    for name in sorted(os.listdir(path)):
        full = os.path.join(path, name)
        if not os.path.isfile(full):
            continue
        ext = os.path.splitext(name)[1].lower()
        if ext in _SCL_EXTENSIONS or ext in (".xml", ".json"):
            with open(full, encoding="utf-8") as fh:
                files[name] = fh.read()
    if not files:
        raise SgcrError(f"{path}: no bundle files found")
    return load_bundle_files(files, source=path)


@dataclass
class PointSpec:
    """Registration plus starting value for one store point."""

    writable: bool
    kind: str  # "real" or "bool"
    initial: float | bool


@dataclass
class RangeSpec:
    """Everything the kernel needs to run one cyber-physical range."""

    bundle: Bundle
    report: ValidationReport
    merged: MergedModel
    network: PowerNetwork
    topology: CyberTopology
    ieds: dict[str, VirtualIed]
    plc_programs: dict[str, PlcProgram]
    bindings: list[MeasurementBinding]
    registrations: dict[str, PointSpec]
    schedules: dict[str, list[bool]]
    scada_points: list[ScadaPoint]
    n_steps: int


def _component_index(network: PowerNetwork) -> dict[str, tuple[str, object]]:
    index: dict[str, tuple[str, object]] = {}
    for gen in network.generators:
        index[gen.name] = ("gen", gen)
    for load in network.loads:
        index[load.name] = ("load", load)
    for line in network.lines:
        index[line.name] = ("branch", line)
    for tr in network.transformers:
        index[tr.name] = ("branch", tr)
    for sw in network.switches:
        index[sw.id] = ("switch", sw)
    return index


def _bus_of(kind: str, item) -> int:
    if kind == "branch":
        return getattr(item, "from_bus", getattr(item, "hv_bus", 0))
    return item.bus


_QUANTITY_SOURCES = {
    ("gen", "i_ka"): "gen_i_ka",
    ("gen", "p_mw"): "gen_p_mw",
    ("gen", "q_mvar"): "gen_q_mvar",
    ("load", "i_ka"): "load_i_ka",
    ("load", "p_mw"): "load_p_mw",
    ("load", "q_mvar"): "load_q_mvar",
    ("branch", "i_ka"): "branch_i_from_ka",
    ("branch", "p_mw"): "branch_p_from_mw",
    ("branch", "q_mvar"): "branch_q_from_mvar",
}


def _derive_binding(point: str, network: PowerNetwork,
                    index: dict[str, tuple[str, object]],
                    problems: list[str]) -> MeasurementBinding | None:
    component, _, quantity = point.rpartition(".")
    entry = index.get(component)
    if entry is None:
        problems.append(f"point {point}: no power component {component!r}")
        return None
    kind, item = entry
    if quantity in ("vm_pu", "v_kv"):
        bus = _bus_of(kind, item)
        kv = network.bus(bus).nominal_kv
        if quantity == "vm_pu":
            return MeasurementBinding(point, "bus_vm_pu", bus)
        return MeasurementBinding(point, "bus_v_ln_kv", bus, nominal_kv=kv)
    source = _QUANTITY_SOURCES.get((kind, quantity))
    if source is None:
        problems.append(
            f"point {point}: no way to measure {quantity!r} on a {kind}")
        return None
    ref = item.id if kind == "switch" else item.name
    kv = None
    if source in ("gen_i_ka", "load_i_ka"):
        kv = network.bus(item.bus).nominal_kv
    return MeasurementBinding(point, source, ref, nominal_kv=kv)


def _switch_initial(network: PowerNetwork, switch_id: str) -> bool:
    sw = network.find_switch(switch_id)
    return bool(sw.closed) if sw is not None else False


def _register_points(spec_regs: dict[str, PointSpec],
                     network: PowerNetwork,
                     mapping: SupplementDoc | None,
                     thresholds: SupplementDoc | None,
                     problems: list[str]) -> list[str]:
    """Fill the registration map; return measurement points needing bindings."""
    measured: list[str] = []
    for entry in (mapping.mappings if mapping else []):
        point = entry.physical_path
        quantity = point.rsplit(".", 1)[-1]
        if quantity in ("pos", "closed"):
            component = point.rsplit(".", 1)[0]
            if network.find_switch(component) is None:
                problems.append(
                    f"point {point}: {component!r} is not a switching device")
                continue
            spec_regs.setdefault(point, PointSpec(
                True, "bool", _switch_initial(network, component)))
        elif point not in spec_regs:
            spec_regs[point] = PointSpec(False, "real", 0.0)
            measured.append(point)
    for t in (thresholds.thresholds if thresholds else []):
        target = t.extra.get("target_cb")
        if not target:
            continue
        point = target if "." in target else f"{target}.pos"
        component = point.rsplit(".", 1)[0]
        if network.find_switch(component) is None:
            problems.append(
                f"settings for {t.ied}.{t.ln_class}{t.instance}: trip target "
                f"{component!r} is not a switching device")
            continue
        spec_regs.setdefault(point, PointSpec(
            True, "bool", _switch_initial(network, component)))
    # every switching device is store-driven so operator and relay
    # commands land in one authoritative place
    for sw in network.switches:
        spec_regs.setdefault(f"{sw.id}.pos",
                             PointSpec(True, "bool", bool(sw.closed)))
    return measured


def _publication_index(ieds: dict[str, VirtualIed]) -> dict[str, tuple]:
    index: dict[str, tuple] = {}
    for name in sorted(ieds):
        for pub in ieds[name].publications:
            for member in pub.members:
                index.setdefault(member, (name, pub.app_id, pub.dataset,
                                          pub.interval_ticks))
    return index


def _wire_subscriptions(ieds: dict[str, VirtualIed],
                        problems: list[str]) -> None:
    index = _publication_index(ieds)
    for name in sorted(ieds):
        ied = ieds[name]
        for path in sorted(ied.remote_inputs()):
            pub = index.get(path)
            if pub is None:
                problems.append(
                    f"{name} needs {path} but no device publishes it")
                continue
            publisher, app_id, dataset, interval = pub
            ied.subscribe(app_id, f"{publisher}.{dataset}",
                          publish_interval=interval)


def compile_range(bundle: Bundle) -> RangeSpec:
    """Build a RangeSpec or raise CompileError listing every problem."""
    problems: list[str] = []

    report = validate_bundle(bundle.scl_documents(), bundle.supplements)
    if not report.ok:
        raise CompileError([str(e) for e in report.errors])

    try:
        merged = merge_bundle(bundle.ssds, seds=bundle.seds,
                              scds=bundle.scds, icds=bundle.icds)
    except SgcrError as exc:
        raise CompileError([f"merge: {exc}"]) from exc

    params = bundle.supplement(POWER_PARAMS)
    if params is None:
        raise CompileError(["no electrical parameters supplement in bundle"])
    try:
        network = build_power_network(merged.ssd, params,
                                      cable_table=bundle.cable_table)
    except SgcrError as exc:
        raise CompileError([f"power network: {exc}"]) from exc

    if merged.scd is not None:
        try:
            topology = build_cyber_topology(merged.scd)
        except SgcrError as exc:
            raise CompileError([f"topology: {exc}"]) from exc
    else:
        topology = CyberTopology()

    mapping = bundle.supplement(CP_MAPPING)
    thresholds = bundle.supplement(THRESHOLDS)

    ieds: dict[str, VirtualIed] = {}
    sections = merged.scd.ieds if merged.scd is not None else []
    for section in sections:
        if not section.logical_devices:
            continue
        node = topology.node(section.name)
        if node is None:
            problems.append(f"{section.name}: no network access point")
            continue
        if node.kind != "ied":
            continue
        try:
            ieds[section.name] = instantiate_ied(
                merged.scd, mapping, thresholds, ied_name=section.name)
        except SgcrError as exc:
            problems.append(f"{section.name}: {exc}")

    _wire_subscriptions(ieds, problems)

    plc_programs: dict[str, PlcProgram] = {}
    for doc in bundle.supplements_of(PLC_PROGRAM):
        try:
            program = load_program(doc)
        except SgcrError as exc:
            problems.append(f"{doc.name or doc.source}: {exc}")
            continue
        node = topology.node(program.name)
        if node is None or node.kind != "plc":
            problems.append(
                f"program {program.name!r} has no controller node to run on")
            continue
        plc_programs[program.name] = program

    registrations: dict[str, PointSpec] = {}
    measured = _register_points(registrations, network, mapping,
                                thresholds, problems)

    index = _component_index(network)
    bindings: list[MeasurementBinding] = []
    for point in measured:
        binding = _derive_binding(point, network, index, problems)
        if binding is not None:
            bindings.append(binding)

    schedules: dict[str, list[bool]] = {}
    for sw in network.switches:
        if sw.data_sequence is not None:
            schedules[f"{sw.id}.pos"] = [bool(v) for v in sw.data_sequence]

    scada = bundle.supplement(SCADA_CONFIG)
    scada_points = list(scada.points) if scada else []

    if problems:
        raise CompileError(problems)

    return RangeSpec(bundle=bundle, report=report, merged=merged,
                     network=network, topology=topology, ieds=ieds,
                     plc_programs=plc_programs, bindings=bindings,
                     registrations=registrations, schedules=schedules,
                     scada_points=scada_points, n_steps=network.n_steps)
