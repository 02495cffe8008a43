"""Supplementary configuration documents.

Five families ride alongside the SCL files: electrical ratings and
time-series (``PowerParams``), physical-point to IED-attribute pairs
(``CPMapping``), protection settings (``Thresholds``), operator point
lists (``ScadaConfig``), and automation logic (``PlcProgram``).  The
schema is deliberately small: one record element per entry, snake_case
attributes, numbers as decimal text, sequences space-separated.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from ..errors import KindMismatch, LengthMismatch, SchemaViolation, XmlSyntax

POWER_PARAMS = "PowerParams"
CP_MAPPING = "CpMapping"
THRESHOLDS = "Thresholds"
SCADA_CONFIG = "ScadaConfig"
PLC_PROGRAM = "PlcProgram"

SUPPLEMENT_KINDS = (POWER_PARAMS, CP_MAPPING, THRESHOLDS, SCADA_CONFIG, PLC_PROGRAM)

THRESHOLD_UNITS = ("pu", "A", "V", "ohm")

_ROOT_TO_KIND = {
    "PowerParams": POWER_PARAMS,
    "CPMapping": CP_MAPPING,
    "CpMapping": CP_MAPPING,
    "Thresholds": THRESHOLDS,
    "ScadaConfig": SCADA_CONFIG,
    "PlcProgram": PLC_PROGRAM,
}


@dataclass
class ComponentParams:
    """Electrical parameters for one named power component."""

    component_ref: str
    p_mw: float | None = None
    q_mvar: float | None = None
    vm_pu: float | None = None
    closed: bool | None = None
    length_km: float | None = None
    std_type: str | None = None
    sn_mva: float | None = None
    vk_percent: float | None = None
    is_slack: bool | None = None
    data_sequence: list[float] | None = None
    extra: dict[str, str] = field(default_factory=dict)


@dataclass
class MappingEntry:
    physical_path: str
    attribute_path: str


@dataclass
class ThresholdEntry:
    """Protection settings for one logical node.

    ``extra`` carries per-class options such as the breaker a trip
    targets, a remote current path for differential comparison, the
    watched breaker of an interlock, a zone impedance, or a minimum
    current pickup.
    """

    ied: str
    ln_class: str
    instance: int
    alarm_threshold: float | None = None
    trip_threshold: float | None = None
    units: str = "pu"
    extra: dict[str, str] = field(default_factory=dict)


@dataclass
class ScadaPoint:
    point_name: str
    attribute_path: str
    writable: bool = False


@dataclass
class PlcVariable:
    name: str
    binding: str
    direction: str  # "in" or "out"


@dataclass
class PlcStatement:
    target_var: str
    expression: str


@dataclass
class SupplementDoc:
    kind: str
    components: list[ComponentParams] = field(default_factory=list)
    mappings: list[MappingEntry] = field(default_factory=list)
    thresholds: list[ThresholdEntry] = field(default_factory=list)
    points: list[ScadaPoint] = field(default_factory=list)
    variables: list[PlcVariable] = field(default_factory=list)
    statements: list[PlcStatement] = field(default_factory=list)
    base_mva: float = 100.0
    scan_interval_ticks: int = 1
    name: str | None = None
    source: str | None = field(default=None, compare=False)

    def timestep_count(self) -> int | None:
        """Shared length of all data sequences, None when there are none."""
        lengths = {len(c.data_sequence) for c in self.components
                   if c.data_sequence is not None}
        if not lengths:
            return None
        return lengths.pop()

    def find_component(self, ref: str) -> ComponentParams | None:
        for c in self.components:
            if c.component_ref == ref:
                return c
        return None


# --- parsing ---------------------------------------------------------------------

def _req(el: ET.Element, attr: str, context: str) -> str:
    value = el.get(attr)
    if value is None or value == "":
        raise SchemaViolation(f"{context}: missing attribute {attr!r}")
    return value


def _opt_float(el: ET.Element, attr: str, context: str) -> float | None:
    text = el.get(attr)
    if text is None:
        return None
    try:
        return float(text)
    except ValueError as exc:
        raise SchemaViolation(f"{context}: bad number for {attr}: {text!r}") from exc


def _opt_bool(el: ET.Element, attr: str, context: str) -> bool | None:
    text = el.get(attr)
    if text is None:
        return None
    low = text.strip().lower()
    if low in ("true", "1"):
        return True
    if low in ("false", "0"):
        return False
    raise SchemaViolation(f"{context}: bad boolean for {attr}: {text!r}")


_COMPONENT_ATTRS = (
    "component_ref", "p_mw", "q_mvar", "vm_pu", "closed", "length_km",
    "std_type", "sn_mva", "vk_percent", "is_slack", "data_sequence",
)
_THRESHOLD_ATTRS = (
    "ied", "ln_class", "instance", "alarm_threshold", "trip_threshold", "units",
)


def _parse_component(el: ET.Element) -> ComponentParams:
    ref = _req(el, "component_ref", "Component")
    ctx = f"Component {ref}"
    seq_text = el.get("data_sequence")
    sequence = None
    if seq_text is not None:
        try:
            sequence = [float(tok) for tok in seq_text.split()]
        except ValueError as exc:
            raise SchemaViolation(f"{ctx}: bad data_sequence") from exc
        if not sequence:
            raise SchemaViolation(f"{ctx}: empty data_sequence")
    return ComponentParams(
        component_ref=ref,
        p_mw=_opt_float(el, "p_mw", ctx),
        q_mvar=_opt_float(el, "q_mvar", ctx),
        vm_pu=_opt_float(el, "vm_pu", ctx),
        closed=_opt_bool(el, "closed", ctx),
        length_km=_opt_float(el, "length_km", ctx),
        std_type=el.get("std_type"),
        sn_mva=_opt_float(el, "sn_mva", ctx),
        vk_percent=_opt_float(el, "vk_percent", ctx),
        is_slack=_opt_bool(el, "is_slack", ctx),
        data_sequence=sequence,
        extra={k: v for k, v in el.attrib.items() if k not in _COMPONENT_ATTRS},
    )


def _parse_threshold(el: ET.Element) -> ThresholdEntry:
    ied = _req(el, "ied", "Threshold")
    ln_class = _req(el, "ln_class", f"Threshold {ied}")
    ctx = f"Threshold {ied}.{ln_class}"
    inst_text = el.get("instance", "1")
    try:
        instance = int(inst_text)
    except ValueError as exc:
        raise SchemaViolation(f"{ctx}: bad instance {inst_text!r}") from exc
    units = el.get("units", "pu")
    if units not in THRESHOLD_UNITS:
        raise SchemaViolation(f"{ctx}: units must be one of {THRESHOLD_UNITS}, got {units!r}")
    return ThresholdEntry(
        ied=ied,
        ln_class=ln_class,
        instance=instance,
        alarm_threshold=_opt_float(el, "alarm_threshold", ctx),
        trip_threshold=_opt_float(el, "trip_threshold", ctx),
        units=units,
        extra={k: v for k, v in el.attrib.items() if k not in _THRESHOLD_ATTRS},
    )


def parse_supplement(text: str, kind: str, source: str | None = None) -> SupplementDoc:
    """Parse one supplement document of the stated kind.

    Raises XmlSyntax for malformed input, KindMismatch when the root
    element names a different family, SchemaViolation for bad records,
    and LengthMismatch when data sequences disagree on length.
    """
    kind = _ROOT_TO_KIND.get(kind, kind)
    if kind not in SUPPLEMENT_KINDS:
        raise ValueError(f"unknown supplement kind {kind!r}")
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise XmlSyntax(str(exc)) from exc
    root_tag = root.tag.rsplit("}", 1)[-1]
    actual = _ROOT_TO_KIND.get(root_tag)
    if actual != kind:
        raise KindMismatch(f"expected a {kind} document, root element is {root_tag!r}")

    doc = SupplementDoc(kind=kind, name=root.get("name"), source=source)
    if kind == POWER_PARAMS:
        base = root.get("base_mva")
        if base is not None:
            doc.base_mva = float(base)
            if doc.base_mva <= 0:
                raise SchemaViolation("base_mva must be positive")
        for child in root:
            if child.tag == "Component":
                doc.components.append(_parse_component(child))
        lengths = {len(c.data_sequence) for c in doc.components
                   if c.data_sequence is not None}
        if len(lengths) > 1:
            raise LengthMismatch(
                f"data_sequence lengths disagree: {sorted(lengths)}")
    elif kind == CP_MAPPING:
        for child in root:
            if child.tag == "Mapping":
                doc.mappings.append(MappingEntry(
                    physical_path=_req(child, "physical_path", "Mapping"),
                    attribute_path=_req(child, "attribute_path", "Mapping"),
                ))
    elif kind == THRESHOLDS:
        for child in root:
            if child.tag == "Threshold":
                doc.thresholds.append(_parse_threshold(child))
    elif kind == SCADA_CONFIG:
        for child in root:
            if child.tag == "Point":
                writable = _opt_bool(child, "writable", "Point")
                doc.points.append(ScadaPoint(
                    point_name=_req(child, "point_name", "Point"),
                    attribute_path=_req(child, "attribute_path", "Point"),
                    writable=bool(writable),
                ))
        names = [p.point_name for p in doc.points]
        if len(names) != len(set(names)):
            raise SchemaViolation("duplicate point_name in ScadaConfig")
    elif kind == PLC_PROGRAM:
        interval = root.get("scan_interval_ticks", "1")
        try:
            doc.scan_interval_ticks = int(interval)
        except ValueError as exc:
            raise SchemaViolation(f"bad scan_interval_ticks {interval!r}") from exc
        if doc.scan_interval_ticks < 1:
            raise SchemaViolation("scan_interval_ticks must be >= 1")
        for child in root:
            if child.tag == "Variable":
                direction = _req(child, "direction", "Variable")
                if direction not in ("in", "out"):
                    raise SchemaViolation(f"Variable direction must be in/out, got {direction!r}")
                doc.variables.append(PlcVariable(
                    name=_req(child, "name", "Variable"),
                    binding=_req(child, "binding", "Variable"),
                    direction=direction,
                ))
            elif child.tag == "Statement":
                doc.statements.append(PlcStatement(
                    target_var=_req(child, "target_var", "Statement"),
                    expression=_req(child, "expression", "Statement"),
                ))
        names = [v.name for v in doc.variables]
        if len(names) != len(set(names)):
            raise SchemaViolation("duplicate Variable name in PlcProgram")
    return doc


# --- serialization ----------------------------------------------------------------

def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def serialize_supplement(doc: SupplementDoc) -> str:
    """Emit the canonical XML form; parse_supplement inverts it exactly."""
    if doc.kind == POWER_PARAMS:
        root = ET.Element("PowerParams", {"base_mva": _num(doc.base_mva)})
        for c in doc.components:
            attrs: dict[str, str] = {"component_ref": c.component_ref}
            for key in ("p_mw", "q_mvar", "vm_pu", "length_km", "sn_mva", "vk_percent"):
                value = getattr(c, key)
                if value is not None:
                    attrs[key] = _num(value)
            if c.closed is not None:
                attrs["closed"] = "true" if c.closed else "false"
            if c.std_type is not None:
                attrs["std_type"] = c.std_type
            if c.is_slack is not None:
                attrs["is_slack"] = "true" if c.is_slack else "false"
            if c.data_sequence is not None:
                attrs["data_sequence"] = " ".join(_num(v) for v in c.data_sequence)
            attrs.update(c.extra)
            ET.SubElement(root, "Component", attrs)
    elif doc.kind == CP_MAPPING:
        root = ET.Element("CPMapping")
        for m in doc.mappings:
            ET.SubElement(root, "Mapping", {
                "physical_path": m.physical_path,
                "attribute_path": m.attribute_path,
            })
    elif doc.kind == THRESHOLDS:
        root = ET.Element("Thresholds")
        for t in doc.thresholds:
            attrs = {"ied": t.ied, "ln_class": t.ln_class, "instance": str(t.instance)}
            if t.alarm_threshold is not None:
                attrs["alarm_threshold"] = _num(t.alarm_threshold)
            if t.trip_threshold is not None:
                attrs["trip_threshold"] = _num(t.trip_threshold)
            attrs["units"] = t.units
            attrs.update(t.extra)
            ET.SubElement(root, "Threshold", attrs)
    elif doc.kind == SCADA_CONFIG:
        root = ET.Element("ScadaConfig")
        for p in doc.points:
            ET.SubElement(root, "Point", {
                "point_name": p.point_name,
                "attribute_path": p.attribute_path,
                "writable": "true" if p.writable else "false",
            })
    elif doc.kind == PLC_PROGRAM:
        attrs = {"scan_interval_ticks": str(doc.scan_interval_ticks)}
        if doc.name:
            attrs["name"] = doc.name
        root = ET.Element("PlcProgram", attrs)
        for v in doc.variables:
            ET.SubElement(root, "Variable",
                          {"name": v.name, "binding": v.binding, "direction": v.direction})
        for s in doc.statements:
            ET.SubElement(root, "Statement",
                          {"target_var": s.target_var, "expression": s.expression})
    else:
        raise ValueError(f"unknown supplement kind {doc.kind!r}")
    if doc.name and doc.kind != PLC_PROGRAM:
        root.set("name", doc.name)
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"
