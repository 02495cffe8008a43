"""Combine per-substation documents into one model.

Substation descriptions concatenate their process sections; tie-line
documents splice their bays into the matching voltage level of an
already-declared process.  Network descriptions concatenate subnetworks
and device entries.  Cable identifiers must stay unique per physical
link after merging, so identical ids coming from unrelated links are
renamed with a source prefix, while a pair of single endpoints from two
files is kept as the inter-substation link it describes.
"""

from __future__ import annotations

import copy
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .errors import (
    CableCollision,
    DuplicateIedName,
    DuplicateProcess,
    KindMismatch,
    NoMatchingVoltageLevel,
    SchemaViolation,
)
from .scl.documents import (
    SCD,
    SED,
    SSD,
    CommunicationSection,
    Header,
    SclDocument,
)


@dataclass
class MergedModel:
    """A merged power model and network model plus bookkeeping.

    ``provenance`` maps a key per merged element (``process:``, ``bay:``,
    ``equipment:``, ``transformer:``, ``subnetwork:``, ``ap:``, ``ied:``)
    to the name of the source document it came from.
    """

    ssd: SclDocument
    scd: SclDocument | None = None
    provenance: dict[str, str] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


def _source_label(doc: SclDocument, index: int) -> str:
    return doc.source or doc.header.id or f"{doc.kind.lower()}{index}"


def _merged_header(docs: list[SclDocument]) -> Header:
    ids = sorted({d.header.id for d in docs if d.header.id})
    return Header(id="|".join(ids) if ids else "merged", version="1")


def _check_kinds(docs: list[SclDocument], allowed: tuple[str, ...], what: str) -> None:
    for doc in docs:
        if doc.kind not in allowed:
            raise KindMismatch(
                f"{what} merge got a {doc.kind} document ({doc.source or doc.header.id})")


# --- power-model merge -------------------------------------------------------------


def merge_ssd(ssds: list[SclDocument], seds: list[SclDocument] = (),
              provenance: dict[str, str] | None = None,
              warnings: list[str] | None = None) -> SclDocument:
    """Concatenate substation processes and splice tie-line bays in.

    Raises DuplicateProcess when two inputs declare the same process and
    NoMatchingVoltageLevel when a tie-line document names a process or
    voltage level absent from every substation input.
    """
    _check_kinds(list(ssds), (SSD,), "SSD")
    _check_kinds(list(seds), (SED,), "SSD")
    prov = provenance if provenance is not None else {}

    merged = SclDocument(kind=SSD, header=_merged_header(list(ssds) + list(seds)))
    by_name: dict[str, object] = {}
    for i, doc in enumerate(ssds):
        label = _source_label(doc, i)
        merged.defaults_applied.extend(doc.defaults_applied)
        merged.extras.extend(doc.extras)
        for proc in doc.processes:
            if proc.name in by_name:
                raise DuplicateProcess(
                    f"process {proc.name!r} declared by {prov.get('process:' + proc.name)}"
                    f" and {label}")
            clone = copy.deepcopy(proc)
            merged.processes.append(clone)
            by_name[proc.name] = clone
            _record_process(prov, clone, label)

    for i, doc in enumerate(seds):
        label = _source_label(doc, i)
        merged.defaults_applied.extend(doc.defaults_applied)
        for proc in doc.processes:
            target = by_name.get(proc.name)
            if target is None:
                raise NoMatchingVoltageLevel(
                    f"{label}: no substation process named {proc.name!r} to extend")
            for vl in proc.voltage_levels:
                slot = next((t for t in target.voltage_levels if t.name == vl.name), None)
                if slot is None:
                    raise NoMatchingVoltageLevel(
                        f"{label}: process {proc.name!r} has no voltage level {vl.name!r}")
                existing = {b.name for b in slot.bays}
                for bay in vl.bays:
                    if bay.name in existing:
                        raise SchemaViolation(
                            f"{label}: bay {bay.name!r} already present under "
                            f"{proc.name}/{vl.name}")
                    clone = copy.deepcopy(bay)
                    slot.bays.append(clone)
                    _record_bay(prov, proc.name, vl.name, clone, label)
    return merged


def _record_process(prov: dict[str, str], proc, label: str) -> None:
    prov[f"process:{proc.name}"] = label
    for vl in proc.voltage_levels:
        for bay in vl.bays:
            _record_bay(prov, proc.name, vl.name, bay, label)


def _record_bay(prov: dict[str, str], proc_name: str, vl_name: str, bay, label: str) -> None:
    base = f"{proc_name}/{vl_name}/{bay.name}"
    prov[f"bay:{base}"] = label
    for eq in bay.equipment:
        prov[f"equipment:{base}/{eq.name}"] = label
    for tr in bay.transformers:
        prov[f"transformer:{base}/{tr.name}"] = label


# --- network-model merge -------------------------------------------------------------


def _cable_endpoint_counts(docs: list[SclDocument]) -> dict[str, dict[int, int]]:
    counts: dict[str, dict[int, int]] = {}
    for idx, doc in enumerate(docs):
        if doc.communication is None:
            continue
        for sn in doc.communication.subnetworks:
            for ap in sn.connected_aps:
                for pc in ap.phys_conns:
                    counts.setdefault(pc.cable, {}).setdefault(idx, 0)
                    counts[pc.cable][idx] += 1
    return counts


def _cable_rename_map(docs: list[SclDocument],
                      warnings: list[str]) -> dict[tuple[int, str], str]:
    """Decide the merged name of every (source, cable) pair.

    A cable seen twice in one file is a complete intra-substation link;
    if several files each hold a complete link under the same id, each
    gets a source prefix.  One endpoint in each of two files is an
    inter-substation link and keeps its id.  Anything else is ambiguous.
    """
    renames: dict[tuple[int, str], str] = {}
    for cable, per_doc in sorted(_cable_endpoint_counts(docs).items()):
        total = sum(per_doc.values())
        if any(c > 2 for c in per_doc.values()) or total > 2 and not all(
                c == 2 for c in per_doc.values()):
            raise CableCollision(
                f"cable {cable!r} has an unresolvable endpoint pattern "
                f"{sorted(per_doc.values())} across inputs")
        if total <= 2:
            continue  # single complete link or legitimate cross-file pair
        labels = [_source_label(docs[idx], idx) for idx in per_doc]
        warnings.append(
            f"CableCollision({cable}): complete links in {', '.join(labels)}; "
            "renamed with source prefixes")
        for idx in per_doc:
            renames[(idx, cable)] = f"{_source_label(docs[idx], idx)}:{cable}"
    return renames


def _merge_templates(docs: list[SclDocument], warnings: list[str]) -> str | None:
    """Concatenate template subtrees, first definition of an id wins."""
    chunks = [d.data_type_templates for d in docs if d.data_type_templates]
    if not chunks:
        return None
    merged = ET.Element("DataTypeTemplates")
    kept: dict[tuple[str, str], ET.Element] = {}
    for chunk in chunks:
        for child in ET.fromstring(chunk):
            key = (child.tag, child.get("id", ""))
            if key in kept:
                if ET.tostring(kept[key]) != ET.tostring(child):
                    warnings.append(
                        f"DataTypeTemplates: conflicting definitions for "
                        f"{key[0]} id={key[1]!r}; first definition kept")
                continue
            kept[key] = child
    for key in sorted(kept):
        merged.append(kept[key])
    return ET.tostring(merged, encoding="unicode")


def merge_scd(scds: list[SclDocument],
              icds: list[SclDocument] = (),
              provenance: dict[str, str] | None = None,
              warnings: list[str] | None = None) -> SclDocument:
    """Concatenate subnetworks and device entries into one network model.

    Device capability documents may be passed alongside; their IED
    sections are carried into the merged document unless the same name
    already arrived with a full definition (DuplicateIedName).
    """
    scds = list(scds)
    _check_kinds(scds, (SCD,), "SCD")
    prov = provenance if provenance is not None else {}
    warn = warnings if warnings is not None else []

    merged = SclDocument(kind=SCD, header=_merged_header(scds + list(icds)),
                         communication=CommunicationSection())
    renames = _cable_rename_map(scds, warn)
    sn_names: set[str] = set()
    ied_names: dict[str, str] = {}
    ap_owner: dict[str, str] = {}

    for idx, doc in enumerate(scds):
        label = _source_label(doc, idx)
        merged.extras.extend(doc.extras)
        for sn in doc.communication.subnetworks:
            clone = copy.deepcopy(sn)
            if clone.name in sn_names:
                new_name = f"{label}:{clone.name}"
                warn.append(f"subnetwork {clone.name!r} renamed to {new_name!r}")
                clone.name = new_name
            sn_names.add(clone.name)
            for ap in clone.connected_aps:
                # The same device may attach to several subnetworks of one
                # file; the same name from two files is two devices.
                owner = ap_owner.setdefault(ap.ied_name, label)
                if owner != label:
                    raise DuplicateIedName(
                        f"access point name {ap.ied_name!r} used by {owner} and {label}")
                for pc in ap.phys_conns:
                    pc.cable = renames.get((idx, pc.cable), pc.cable)
                prov[f"ap:{clone.name}/{ap.ied_name}"] = label
            merged.communication.subnetworks.append(clone)
            prov[f"subnetwork:{clone.name}"] = label
        for ied in doc.ieds:
            if ied.name in ied_names:
                raise DuplicateIedName(
                    f"IED {ied.name!r} declared by {ied_names[ied.name]} and {label}")
            ied_names[ied.name] = label
            merged.ieds.append(copy.deepcopy(ied))
            prov[f"ied:{ied.name}"] = label

    for j, doc in enumerate(icds):
        label = _source_label(doc, j)
        for ied in doc.ieds:
            holder = next((x for x in merged.ieds if x.name == ied.name), None)
            if holder is not None:
                if holder.logical_devices:
                    raise DuplicateIedName(
                        f"IED {ied.name!r} fully declared by {ied_names[ied.name]}"
                        f" and {label}")
                merged.ieds.remove(holder)  # stub replaced by the capability file
            ied_names[ied.name] = label
            merged.ieds.append(copy.deepcopy(ied))
            prov[f"ied:{ied.name}"] = label

    merged.data_type_templates = _merge_templates(scds + list(icds), warn)
    return merged


def merge_bundle(ssds: list[SclDocument], seds: list[SclDocument] = (),
                 scds: list[SclDocument] = (),
                 icds: list[SclDocument] = ()) -> MergedModel:
    """Merge a whole bundle and keep per-element provenance."""
    provenance: dict[str, str] = {}
    warnings: list[str] = []
    ssd = merge_ssd(list(ssds), list(seds), provenance, warnings)
    scd = None
    if scds:
        scd = merge_scd(list(scds), list(icds), provenance, warnings)
    return MergedModel(ssd=ssd, scd=scd, provenance=provenance, warnings=warnings)
