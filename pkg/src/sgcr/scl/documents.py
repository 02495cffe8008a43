"""Typed views of SCL documents (SSD / SCD / ICD / SED).

The model keeps only what the toolchain consumes; everything else (vendor
extensions, data type templates) is retained opaquely as serialized XML so
documents round-trip.  Fields named after the SCL elements they come from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

SSD = "SSD"
SCD = "SCD"
ICD = "ICD"
SED = "SED"

DOCUMENT_KINDS = (SSD, SCD, ICD, SED)

# Conducting equipment types with dedicated power-model roles.
CE_GENERATOR = "GEN"
CE_LOAD = "IFL"
CE_BREAKER = "CBR"
CE_DISCONNECTOR = "DIS"
CE_LINE_TYPES = ("CAB", "LIN")

PROTECTION_CLASSES = ("PTOC", "PTOV", "PTUV", "PTRC", "CILO", "PDIF", "PDIS")


@dataclass
class Header:
    id: str
    version: str = "1"


@dataclass
class Terminal:
    connectivity_node: str
    voltage_level_name: str | None = None


@dataclass
class ConductingEquipment:
    name: str
    ce_type: str
    terminals: list[Terminal] = field(default_factory=list)


@dataclass
class TransformerWinding:
    name: str
    terminal: Terminal


@dataclass
class PowerTransformer:
    name: str
    windings: list[TransformerWinding] = field(default_factory=list)


@dataclass
class Bay:
    name: str
    equipment: list[ConductingEquipment] = field(default_factory=list)
    transformers: list[PowerTransformer] = field(default_factory=list)
    connectivity_nodes: list[str] = field(default_factory=list)
    extras: list[str] = field(default_factory=list)


@dataclass
class VoltageLevel:
    name: str
    nominal_kv: float
    num_phases: int = 3
    nom_freq: float = 50.0
    bays: list[Bay] = field(default_factory=list)
    extras: list[str] = field(default_factory=list)


@dataclass
class ProcessSection:
    """One plant-level section (a substation or DER plant)."""

    name: str
    voltage_levels: list[VoltageLevel] = field(default_factory=list)
    extras: list[str] = field(default_factory=list)


@dataclass
class Address:
    ip: str
    netmask: str
    gateway: str


@dataclass
class PhysConn:
    port: str
    cable: str


@dataclass
class ConnectedAp:
    ied_name: str
    ap_name: str
    address: Address
    phys_conns: list[PhysConn] = field(default_factory=list)
    extras: list[str] = field(default_factory=list)


@dataclass
class SubNetwork:
    name: str
    connected_aps: list[ConnectedAp] = field(default_factory=list)
    extras: list[str] = field(default_factory=list)


@dataclass
class CommunicationSection:
    subnetworks: list[SubNetwork] = field(default_factory=list)
    extras: list[str] = field(default_factory=list)


@dataclass
class DataObject:
    name: str
    # Dotted attribute paths below the data object, e.g. "phsA.cVal".
    attributes: list[str] = field(default_factory=list)


@dataclass
class LogicalNode:
    ln_class: str
    instance: int
    data_objects: list[DataObject] = field(default_factory=list)

    @property
    def token(self) -> str:
        """Class+instance token as used in attribute paths, e.g. MMXU1."""
        return f"{self.ln_class}{self.instance}"


@dataclass
class LogicalDevice:
    name: str
    logical_nodes: list[LogicalNode] = field(default_factory=list)


@dataclass
class DataSetDef:
    name: str
    members: list[str] = field(default_factory=list)  # absolute attribute paths


GOOSE = "GOOSE"
RGOOSE = "RGOOSE"
REPORT = "REPORT"


@dataclass
class ControlBlock:
    kind: str  # GOOSE | RGOOSE | REPORT
    name: str
    dataset_ref: str
    app_id: int = 0


@dataclass
class IedSection:
    name: str
    ied_type: str = "IED"  # IED | SWITCH | PLC | GATEWAY | HMI
    logical_devices: list[LogicalDevice] = field(default_factory=list)
    datasets: list[DataSetDef] = field(default_factory=list)
    control_blocks: list[ControlBlock] = field(default_factory=list)
    extras: list[str] = field(default_factory=list)

    def logical_nodes(self) -> Iterator[LogicalNode]:
        for ld in self.logical_devices:
            yield from ld.logical_nodes

    def find_ln(self, ln_class: str, instance: int | None = None) -> LogicalNode | None:
        """Resolve a logical node by class, optionally pinned to an instance.

        A bare class token matches the unique instance of that class, or
        instance 1 when several exist.
        """
        hits = [ln for ln in self.logical_nodes() if ln.ln_class == ln_class]
        if instance is not None:
            for ln in hits:
                if ln.instance == instance:
                    return ln
            return None
        if len(hits) == 1:
            return hits[0]
        for ln in hits:
            if ln.instance == 1:
                return ln
        return None


@dataclass
class SclDocument:
    kind: str
    header: Header
    processes: list[ProcessSection] = field(default_factory=list)
    communication: CommunicationSection | None = None
    ieds: list[IedSection] = field(default_factory=list)
    data_type_templates: str | None = None  # serialized subtree, kept verbatim
    extras: list[str] = field(default_factory=list)
    source: str | None = field(default=None, compare=False)
    defaults_applied: list[str] = field(default_factory=list, compare=False)

    # -- counting helpers used by the merge fidelity checks -------------------

    def process_count(self) -> int:
        return len(self.processes)

    def bay_count(self) -> int:
        return sum(len(vl.bays) for p in self.processes for vl in p.voltage_levels)

    def equipment_count(self) -> int:
        return sum(
            len(b.equipment)
            for p in self.processes
            for vl in p.voltage_levels
            for b in vl.bays
        )

    def subnetwork_count(self) -> int:
        return len(self.communication.subnetworks) if self.communication else 0

    def iter_bays(self) -> Iterator[tuple[ProcessSection, VoltageLevel, Bay]]:
        for p in self.processes:
            for vl in p.voltage_levels:
                for b in vl.bays:
                    yield p, vl, b

    def find_process(self, name: str) -> ProcessSection | None:
        for p in self.processes:
            if p.name == name:
                return p
        return None

    def find_ied(self, name: str) -> IedSection | None:
        for ied in self.ieds:
            if ied.name == name:
                return ied
        return None

    def declared_connectivity_nodes(self) -> set[str]:
        nodes: set[str] = set()
        for _, _, bay in self.iter_bays():
            nodes.update(bay.connectivity_nodes)
        return nodes


# --- attribute paths ----------------------------------------------------------

def split_attribute_path(path: str) -> tuple[str, str, list[str]]:
    """Split ``IED.LN.DO...`` into (ied, ln token, remaining segments).

    Raises ValueError for paths with fewer than three segments.
    """
    parts = path.split(".")
    if len(parts) < 3 or not all(parts):
        raise ValueError(f"attribute path needs >=3 dot-separated segments: {path!r}")
    return parts[0], parts[1], parts[2:]


def split_ln_token(token: str) -> tuple[str, int | None]:
    """Split ``MMXU2`` into ("MMXU", 2); a bare class yields (class, None)."""
    i = len(token)
    while i > 0 and token[i - 1].isdigit():
        i -= 1
    cls = token[:i]
    inst = int(token[i:]) if i < len(token) else None
    if not cls:
        raise ValueError(f"empty logical node class in token {token!r}")
    return cls, inst


def resolve_attribute_path(doc_or_ied, path: str) -> tuple[IedSection, LogicalNode, str] | None:
    """Resolve an absolute attribute path against a document or IED section.

    Returns (ied, logical node, dotted tail below the LN) or None when any
    segment does not resolve.
    """
    ied_name, ln_token, rest = split_attribute_path(path)
    if isinstance(doc_or_ied, IedSection):
        ied = doc_or_ied if doc_or_ied.name == ied_name else None
    else:
        ied = doc_or_ied.find_ied(ied_name)
    if ied is None:
        return None
    cls, inst = split_ln_token(ln_token)
    ln = ied.find_ln(cls, inst)
    if ln is None:
        return None
    return ied, ln, ".".join(rest)


# --- structural comparison ------------------------------------------------------

def _norm_bay(b: Bay):
    return (
        b.name,
        tuple(sorted((e.name, e.ce_type, tuple((t.connectivity_node, t.voltage_level_name) for t in e.terminals)) for e in b.equipment)),
        tuple(sorted((t.name, tuple((w.name, w.terminal.connectivity_node, w.terminal.voltage_level_name) for w in t.windings)) for t in b.transformers)),
        tuple(sorted(b.connectivity_nodes)),
        tuple(sorted(b.extras)),
    )


def _norm_process(p: ProcessSection):
    return (
        p.name,
        tuple(sorted(
            (vl.name, vl.nominal_kv, vl.num_phases, vl.nom_freq, tuple(sorted(_norm_bay(b) for b in vl.bays)))
            for vl in p.voltage_levels
        )),
    )


def _norm_subnetwork(sn: SubNetwork):
    return (
        sn.name,
        tuple(sorted(
            (ap.ied_name, ap.ap_name, ap.address.ip, ap.address.netmask, ap.address.gateway,
             tuple(sorted((pc.port, pc.cable) for pc in ap.phys_conns)))
            for ap in sn.connected_aps
        )),
    )


def structural_key(doc: SclDocument):
    """Order-insensitive normal form used for merge property checks."""
    comm = None
    if doc.communication is not None:
        comm = tuple(sorted(_norm_subnetwork(sn) for sn in doc.communication.subnetworks))
    ieds = tuple(sorted(
        (ied.name, ied.ied_type,
         tuple(sorted((ld.name, tuple(sorted((ln.ln_class, ln.instance) for ln in ld.logical_nodes))) for ld in ied.logical_devices)),
         tuple(sorted((ds.name, tuple(ds.members)) for ds in ied.datasets)),
         tuple(sorted((cb.kind, cb.name, cb.dataset_ref, cb.app_id) for cb in ied.control_blocks)))
        for ied in doc.ieds
    ))
    return (
        doc.kind,
        (doc.header.id, doc.header.version),
        tuple(sorted(_norm_process(p) for p in doc.processes)),
        comm,
        ieds,
        doc.data_type_templates,
    )


def structurally_equal(a: SclDocument, b: SclDocument) -> bool:
    return structural_key(a) == structural_key(b)
