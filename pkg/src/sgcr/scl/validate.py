"""Cross-reference validation over a parsed document bundle.

Checks span files: a tie-line description may reference voltage levels
declared in another document, and mapping supplements point into ICDs.
Problems are collected into a report rather than raised, so a single
run surfaces everything wrong with a bundle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .documents import (
    CE_LINE_TYPES,
    IedSection,
    SclDocument,
    resolve_attribute_path,
    split_attribute_path,
)
from .supplements import (
    CP_MAPPING,
    PLC_PROGRAM,
    POWER_PARAMS,
    SCADA_CONFIG,
    THRESHOLDS,
    SupplementDoc,
)

ERROR = "error"
WARNING = "warning"

# Threshold extras holding IED attribute paths that must resolve.
_THRESHOLD_PATH_EXTRAS = ("partner_current", "source_cb", "monitored")


@dataclass
class ValidationEntry:
    severity: str
    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"[{self.severity}] {self.code}({self.subject}): {self.message}"


@dataclass
class ValidationReport:
    entries: list[ValidationEntry] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def errors(self) -> list[ValidationEntry]:
        return [e for e in self.entries if e.severity == ERROR]

    @property
    def warnings(self) -> list[ValidationEntry]:
        return [e for e in self.entries if e.severity == WARNING]

    def error(self, code: str, subject: str, message: str) -> None:
        self.entries.append(ValidationEntry(ERROR, code, subject, message))

    def warning(self, code: str, subject: str, message: str) -> None:
        self.entries.append(ValidationEntry(WARNING, code, subject, message))

    def summary(self) -> str:
        lines = [str(e) for e in self.entries]
        verdict = "OK" if self.ok else "FAILED"
        lines.append(f"validation {verdict}: {len(self.errors)} error(s), "
                     f"{len(self.warnings)} warning(s)")
        return "\n".join(lines)


def _component_names(docs: list[SclDocument]) -> set[str]:
    names: set[str] = set()
    for doc in docs:
        for _proc, _vl, bay in doc.iter_bays():
            names.update(e.name for e in bay.equipment)
            names.update(t.name for t in bay.transformers)
    return names


def _ied_index(docs: list[SclDocument]) -> dict[str, IedSection]:
    index: dict[str, IedSection] = {}
    for doc in docs:
        for ied in doc.ieds:
            index.setdefault(ied.name, ied)
    return index


def _check_attribute_path(report: ValidationReport, ieds: dict[str, IedSection],
                          path: str, origin: str) -> None:
    try:
        ied_name, _, _ = split_attribute_path(path)
    except ValueError:
        report.error("UnresolvedAttributePath", path, f"{origin}: malformed path")
        return
    ied = ieds.get(ied_name)
    if ied is None:
        report.error("UnresolvedAttributePath", path,
                     f"{origin}: no IED named {ied_name!r} in the bundle")
        return
    if resolve_attribute_path(ied, path) is None:
        report.error("UnresolvedAttributePath", path,
                     f"{origin}: path does not resolve inside IED {ied_name!r}")


def _check_connectivity(report: ValidationReport, docs: list[SclDocument]) -> None:
    declared: set[str] = set()
    referenced: list[tuple[str, str]] = []
    for doc in docs:
        declared.update(doc.declared_connectivity_nodes())
        for proc, vl, bay in doc.iter_bays():
            where = f"{proc.name}/{vl.name}/{bay.name}"
            for eq in bay.equipment:
                for t in eq.terminals:
                    referenced.append((t.connectivity_node, f"{where}/{eq.name}"))
            for tr in bay.transformers:
                for w in tr.windings:
                    referenced.append((w.terminal.connectivity_node,
                                       f"{where}/{tr.name}/{w.name}"))
    if referenced and not declared:
        report.warning("ImplicitConnectivityNodes", "-",
                       "no ConnectivityNode declarations; terminal references "
                       "are treated as self-declaring")
        return
    for node, origin in referenced:
        if node not in declared:
            report.error("UnresolvedConnectivityNode", node,
                         f"{origin}: terminal references an undeclared node")


def _check_cables(report: ValidationReport, docs: list[SclDocument]) -> None:
    per_doc: dict[str, dict[int, int]] = {}
    for idx, doc in enumerate(docs):
        if doc.communication is None:
            continue
        for sn in doc.communication.subnetworks:
            for ap in sn.connected_aps:
                for pc in ap.phys_conns:
                    per_doc.setdefault(pc.cable, {}).setdefault(idx, 0)
                    per_doc[pc.cable][idx] += 1
                    if not pc.port:
                        report.warning(
                            "PortAbsent", f"{ap.ied_name}/{pc.cable}",
                            "physical connection names no port; kept blank")
    for cable, counts in sorted(per_doc.items()):
        total = sum(counts.values())
        if total == 2:
            continue
        if total == 1:
            report.error("DanglingCable", cable,
                         "cable appears on exactly one endpoint")
        elif all(c == 2 for c in counts.values()):
            report.warning("CableCollision", cable,
                           f"cable name reused as a complete pair in {len(counts)} "
                           "documents; merge will keep them apart by namespacing")
        else:
            report.error("CableTriple", cable,
                         f"cable appears on {total} endpoints across the bundle")


def _check_ied_internals(report: ValidationReport, docs: list[SclDocument],
                         ieds: dict[str, IedSection]) -> None:
    seen: dict[str, int] = {}
    for doc in docs:
        for ied in doc.ieds:
            seen[ied.name] = seen.get(ied.name, 0) + 1
    for name, count in sorted(seen.items()):
        if count > 1:
            report.error("DuplicateIedName", name,
                         f"IED declared in {count} documents")
    for ied in ieds.values():
        dataset_names = {ds.name for ds in ied.datasets}
        for cb in ied.control_blocks:
            if cb.dataset_ref not in dataset_names:
                report.error("UnresolvedDatasetRef", f"{ied.name}.{cb.name}",
                             f"control block references unknown dataset {cb.dataset_ref!r}")
        for ds in ied.datasets:
            for member in ds.members:
                _check_attribute_path(report, ieds, member,
                                      f"dataset {ied.name}.{ds.name}")


_REQUIRED_PARAMS = {
    "GEN": ("vm_pu",),
    "IFL": ("p_mw", "q_mvar"),
    "CBR": ("closed",),
    "DIS": ("closed",),
}
_LINE_PARAMS = ("length_km", "std_type")
_TRANSFORMER_PARAMS = ("sn_mva", "vk_percent")


def _check_power_params(report: ValidationReport, docs: list[SclDocument],
                        params: list[SupplementDoc]) -> None:
    components = _component_names(docs)
    if not components:
        return
    if not params:
        report.warning("NoPowerParams", "-",
                       "bundle carries power components but no PowerParams "
                       "document; parameter coverage not checked")
        return
    by_ref: dict[str, SupplementDoc] = {}
    merged: dict[str, object] = {}
    for doc in params:
        for comp in doc.components:
            if comp.component_ref not in components:
                report.error("UnresolvedComponentRef", comp.component_ref,
                             "PowerParams names a component absent from the bundle")
            merged[comp.component_ref] = comp
            by_ref[comp.component_ref] = doc
    for doc in docs:
        for _proc, _vl, bay in doc.iter_bays():
            for eq in bay.equipment:
                needed = _REQUIRED_PARAMS.get(eq.ce_type)
                if needed is None and eq.ce_type in CE_LINE_TYPES:
                    needed = _LINE_PARAMS
                if needed is None:
                    continue
                comp = merged.get(eq.name)
                missing = [k for k in needed
                           if comp is None or getattr(comp, k) is None]
                if missing:
                    report.error("MissingParameter", eq.name,
                                 f"{eq.ce_type} lacks {', '.join(missing)}")
            for tr in bay.transformers:
                comp = merged.get(tr.name)
                missing = [k for k in _TRANSFORMER_PARAMS
                           if comp is None or getattr(comp, k) is None]
                if missing:
                    report.error("MissingParameter", tr.name,
                                 f"transformer lacks {', '.join(missing)}")


def validate_bundle(scl_docs: list[SclDocument],
                    supplements: list[SupplementDoc]) -> ValidationReport:
    """Cross-check every reference in a bundle of parsed documents."""
    report = ValidationReport()
    ieds = _ied_index(scl_docs)
    components = _component_names(scl_docs)

    for doc in scl_docs:
        for note in doc.defaults_applied:
            report.warning("DefaultApplied", doc.source or doc.kind, note)

    _check_connectivity(report, scl_docs)
    _check_cables(report, scl_docs)
    _check_ied_internals(report, scl_docs, ieds)
    _check_power_params(report, scl_docs,
                        [s for s in supplements if s.kind == POWER_PARAMS])

    for sup in supplements:
        origin = sup.source or sup.kind
        if sup.kind == CP_MAPPING:
            for m in sup.mappings:
                first = m.physical_path.split(".", 1)[0]
                if components and first not in components:
                    report.error("UnresolvedComponentRef", m.physical_path,
                                 f"{origin}: physical path names unknown component")
                _check_attribute_path(report, ieds, m.attribute_path, origin)
        elif sup.kind == THRESHOLDS:
            for t in sup.thresholds:
                subject = f"{t.ied}.{t.ln_class}{t.instance}"
                ied = ieds.get(t.ied)
                if ied is None:
                    report.error("UnresolvedAttributePath", subject,
                                 f"{origin}: no IED named {t.ied!r}")
                    continue
                if ied.find_ln(t.ln_class, t.instance) is None:
                    report.error("UnresolvedAttributePath", subject,
                                 f"{origin}: IED has no {t.ln_class}{t.instance}")
                for key in _THRESHOLD_PATH_EXTRAS:
                    if key in t.extra:
                        # monitored may carry several space-separated paths
                        for token in t.extra[key].split():
                            _check_attribute_path(report, ieds, token,
                                                  f"{origin}:{subject}")
                if "target_cb" in t.extra and components:
                    first = t.extra["target_cb"].split(".", 1)[0]
                    if first not in components:
                        report.error("UnresolvedComponentRef", t.extra["target_cb"],
                                     f"{origin}:{subject}: unknown breaker")
        elif sup.kind == SCADA_CONFIG:
            for p in sup.points:
                _check_attribute_path(report, ieds, p.attribute_path,
                                      f"{origin}:{p.point_name}")
        elif sup.kind == PLC_PROGRAM:
            for v in sup.variables:
                _check_attribute_path(report, ieds, v.binding,
                                      f"{origin}:{v.name}")
    return report
