"""SCL parsing and serialization.

Element and attribute spellings follow IEC 61850-6 (``Substation``,
``VoltageLevel``, ``Bay``, ``ConductingEquipment``, ``Terminal``,
``PowerTransformer``, ``TransformerWinding``, ``Communication``,
``SubNetwork``, ``ConnectedAP``, ``Address``, ``PhysConn``, ``IED``,
``LDevice``, ``LN``/``LN0``, ``DataSet``).  Unknown children of known
containers are preserved verbatim and re-emitted on serialization, so
documents carrying vendor extensions survive a parse/serialize cycle.
"""

from __future__ import annotations

import ipaddress
import re
import xml.etree.ElementTree as ET

from ..errors import KindMismatch, SchemaViolation, XmlSyntax
from .documents import (
    GOOSE,
    ICD,
    REPORT,
    RGOOSE,
    SCD,
    SED,
    SSD,
    Address,
    Bay,
    CommunicationSection,
    ConductingEquipment,
    ConnectedAp,
    ControlBlock,
    DataObject,
    DataSetDef,
    DOCUMENT_KINDS,
    Header,
    IedSection,
    LogicalDevice,
    LogicalNode,
    PhysConn,
    PowerTransformer,
    ProcessSection,
    SclDocument,
    SubNetwork,
    Terminal,
    TransformerWinding,
    VoltageLevel,
    split_attribute_path,
    split_ln_token,
)

_VOLTAGE_IN_NAME = re.compile(r"([0-9]+(?:\.[0-9]+)?)\s*k?V?", re.IGNORECASE)

# Multipliers for the <Voltage> element, relative to kV.
_VOLTAGE_MULTIPLIERS = {"k": 1.0, "M": 1000.0, "": 0.001, "m": 1e-6}


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _children(el: ET.Element):
    for child in el:
        yield _strip_ns(child.tag), child


def _tostring(el: ET.Element) -> str:
    clone = _strip_namespaces(el)
    return ET.tostring(clone, encoding="unicode")


def _strip_namespaces(el: ET.Element) -> ET.Element:
    clone = ET.Element(_strip_ns(el.tag), dict(el.attrib))
    # Drop whitespace-only text so retained subtrees are indentation-proof.
    clone.text = el.text if el.text and el.text.strip() else None
    clone.tail = None
    for child in el:
        clone.append(_strip_namespaces(child))
    return clone


def _require(el: ET.Element, attr: str, context: str) -> str:
    value = el.get(attr)
    if value is None or value == "":
        raise SchemaViolation(f"{context}: missing mandatory attribute {attr!r}")
    return value


def _check_unique(names: list[str], what: str, context: str) -> None:
    seen = set()
    for n in names:
        if n in seen:
            raise SchemaViolation(f"{context}: duplicate {what} name {n!r}")
        seen.add(n)


def _parse_bool(text: str, context: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "close", "closed", "on"):
        return True
    if low in ("false", "0", "open", "off"):
        return False
    raise SchemaViolation(f"{context}: cannot read boolean from {text!r}")


# --- power section -------------------------------------------------------------

def _parse_terminal(el: ET.Element, context: str) -> Terminal:
    return Terminal(
        connectivity_node=_require(el, "connectivityNode", context),
        voltage_level_name=el.get("voltageLevelName"),
    )


def _parse_equipment(el: ET.Element, context: str) -> ConductingEquipment:
    name = _require(el, "name", context)
    ce_type = el.get("type") or el.get("Type")
    if not ce_type:
        raise SchemaViolation(f"{context}/{name}: ConductingEquipment needs a type")
    terminals = [
        _parse_terminal(child, f"{context}/{name}")
        for tag, child in _children(el)
        if tag == "Terminal"
    ]
    ce = ConductingEquipment(name=name, ce_type=ce_type, terminals=terminals)
    if ce_type in ("CBR", "DIS") and len(terminals) != 2:
        raise SchemaViolation(f"{context}/{name}: {ce_type} needs exactly 2 terminals")
    if ce_type in ("GEN", "IFL") and len(terminals) < 1:
        raise SchemaViolation(f"{context}/{name}: {ce_type} needs at least 1 terminal")
    return ce


def _parse_transformer(el: ET.Element, context: str) -> PowerTransformer:
    name = _require(el, "name", context)
    windings = []
    for tag, child in _children(el):
        if tag != "TransformerWinding":
            continue
        wname = _require(child, "name", f"{context}/{name}")
        terms = [
            _parse_terminal(t, f"{context}/{name}/{wname}")
            for ttag, t in _children(child)
            if ttag == "Terminal"
        ]
        if len(terms) != 1:
            raise SchemaViolation(f"{context}/{name}/{wname}: winding needs exactly 1 terminal")
        windings.append(TransformerWinding(name=wname, terminal=terms[0]))
    if len(windings) != 2:
        raise SchemaViolation(f"{context}/{name}: exactly 2 windings supported")
    vls = {w.terminal.voltage_level_name for w in windings}
    if len(vls) != 2:
        raise SchemaViolation(f"{context}/{name}: windings must reference two voltage levels")
    return PowerTransformer(name=name, windings=windings)


def _parse_bay(el: ET.Element, context: str) -> Bay:
    name = _require(el, "name", context)
    bay = Bay(name=name)
    for tag, child in _children(el):
        if tag == "ConductingEquipment":
            bay.equipment.append(_parse_equipment(child, f"{context}/{name}"))
        elif tag == "PowerTransformer":
            bay.transformers.append(_parse_transformer(child, f"{context}/{name}"))
        elif tag == "ConnectivityNode":
            path = child.get("pathName") or child.get("name")
            if not path:
                raise SchemaViolation(f"{context}/{name}: ConnectivityNode needs pathName or name")
            bay.connectivity_nodes.append(path)
        else:
            bay.extras.append(_tostring(child))
    _check_unique([e.name for e in bay.equipment], "equipment", f"{context}/{name}")
    return bay


def _voltage_level_kv(el: ET.Element, name: str, defaults: list[str]) -> float:
    for tag, child in _children(el):
        if tag == "Voltage":
            mult = child.get("multiplier", "k")
            if mult not in _VOLTAGE_MULTIPLIERS:
                raise SchemaViolation(f"VoltageLevel {name}: unknown multiplier {mult!r}")
            try:
                return float((child.text or "").strip()) * _VOLTAGE_MULTIPLIERS[mult]
            except ValueError as exc:
                raise SchemaViolation(f"VoltageLevel {name}: bad Voltage value") from exc
    m = _VOLTAGE_IN_NAME.match(name)
    if m:
        defaults.append(f"VoltageLevel {name}: nominal kV inferred from name")
        return float(m.group(1))
    raise SchemaViolation(f"VoltageLevel {name}: no Voltage element and name is not a rating")


def _parse_voltage_level(el: ET.Element, context: str, defaults: list[str]) -> VoltageLevel:
    name = _require(el, "name", context)
    kv = _voltage_level_kv(el, name, defaults)
    if kv <= 0:
        raise SchemaViolation(f"{context}/{name}: nominal kV must be positive")
    freq_text = el.get("nomFreq")
    phases_text = el.get("numPhases")
    if freq_text is None:
        defaults.append(f"VoltageLevel {name}: nomFreq defaulted to 50 Hz")
    if phases_text is None:
        defaults.append(f"VoltageLevel {name}: numPhases defaulted to 3")
    num_phases = int(phases_text) if phases_text is not None else 3
    if num_phases not in (1, 3):
        raise SchemaViolation(f"{context}/{name}: numPhases must be 1 or 3")
    vl = VoltageLevel(
        name=name,
        nominal_kv=kv,
        num_phases=num_phases,
        nom_freq=float(freq_text) if freq_text is not None else 50.0,
    )
    for tag, child in _children(el):
        if tag == "Bay":
            vl.bays.append(_parse_bay(child, f"{context}/{name}"))
        elif tag == "Voltage":
            continue
        else:
            vl.extras.append(_tostring(child))
    _check_unique([b.name for b in vl.bays], "bay", f"{context}/{name}")
    return vl


def _parse_process(el: ET.Element, defaults: list[str]) -> ProcessSection:
    name = _require(el, "name", "Substation")
    proc = ProcessSection(name=name)
    for tag, child in _children(el):
        if tag == "VoltageLevel":
            proc.voltage_levels.append(_parse_voltage_level(child, name, defaults))
        else:
            proc.extras.append(_tostring(child))
    _check_unique([vl.name for vl in proc.voltage_levels], "voltage level", name)
    return proc


# --- communication section ------------------------------------------------------

def _p_values(el: ET.Element) -> dict[str, str]:
    vals: dict[str, str] = {}
    for tag, child in _children(el):
        if tag == "P" and child.get("type"):
            vals[child.get("type")] = (child.text or "").strip()
    return vals


def _parse_connected_ap(el: ET.Element, context: str) -> ConnectedAp:
    ied_name = _require(el, "iedName", context)
    ap_name = el.get("apName", "AP1")
    address = Address(ip="", netmask="", gateway="")
    phys_conns: list[PhysConn] = []
    extras: list[str] = []
    for tag, child in _children(el):
        if tag == "Address":
            vals = _p_values(child)
            address = Address(
                ip=vals.get("IP", ""),
                netmask=vals.get("IP-SUBNET", ""),
                gateway=vals.get("IP-GATEWAY", ""),
            )
        elif tag == "PhysConn":
            vals = _p_values(child)
            port = vals.get("Port")
            cable = vals.get("Cable")
            if port is None:
                raise SchemaViolation(f"{context}/{ied_name}: PhysConn without Port")
            if not cable:
                raise SchemaViolation(f"{context}/{ied_name}: PhysConn without Cable")
            phys_conns.append(PhysConn(port=port, cable=cable))
        else:
            extras.append(_tostring(child))
    if address.ip:
        try:
            ipaddress.IPv4Address(address.ip)
        except ValueError as exc:
            raise SchemaViolation(f"{context}/{ied_name}: bad IPv4 address {address.ip!r}") from exc
    return ConnectedAp(
        ied_name=ied_name, ap_name=ap_name, address=address,
        phys_conns=phys_conns, extras=extras,
    )


def _parse_communication(el: ET.Element) -> CommunicationSection:
    comm = CommunicationSection()
    for tag, child in _children(el):
        if tag == "SubNetwork":
            name = _require(child, "name", "SubNetwork")
            sn = SubNetwork(name=name)
            for ctag, cchild in _children(child):
                if ctag == "ConnectedAP":
                    sn.connected_aps.append(_parse_connected_ap(cchild, name))
                else:
                    sn.extras.append(_tostring(cchild))
            comm.subnetworks.append(sn)
        else:
            comm.extras.append(_tostring(child))
    _check_unique([sn.name for sn in comm.subnetworks], "subnetwork", "Communication")
    return comm


# --- IED section -----------------------------------------------------------------

def _collect_dai_paths(el: ET.Element, prefix: str, out: list[str]) -> None:
    for tag, child in _children(el):
        name = child.get("name", "")
        if tag == "DAI":
            out.append(f"{prefix}{name}" if prefix else name)
        elif tag == "SDI":
            _collect_dai_paths(child, f"{prefix}{name}.", out)


def _parse_ln(el: ET.Element, context: str) -> LogicalNode:
    ln_class = _require(el, "lnClass", context)
    inst_text = el.get("inst", "") or "1"
    try:
        instance = int(inst_text)
    except ValueError as exc:
        raise SchemaViolation(f"{context}: bad LN inst {inst_text!r}") from exc
    ln = LogicalNode(ln_class=ln_class, instance=instance)
    for tag, child in _children(el):
        if tag == "DOI":
            do = DataObject(name=_require(child, "name", f"{context}/{ln_class}"))
            _collect_dai_paths(child, "", do.attributes)
            ln.data_objects.append(do)
    return ln


def _parse_dataset(el: ET.Element, ied_name: str, context: str) -> DataSetDef:
    name = _require(el, "name", context)
    members: list[str] = []
    for tag, child in _children(el):
        if tag != "FCDA":
            continue
        ln_class = _require(child, "lnClass", f"{context}/{name}")
        ln_inst = child.get("lnInst", "1")
        do_name = _require(child, "doName", f"{context}/{name}")
        da_name = child.get("daName", "")
        path = f"{ied_name}.{ln_class}{ln_inst}.{do_name}"
        if da_name:
            path += f".{da_name}"
        split_attribute_path(path)  # raises ValueError for malformed members
        members.append(path)
    return DataSetDef(name=name, members=members)


def _parse_control_block(el: ET.Element, kind_default: str, context: str) -> ControlBlock:
    name = _require(el, "name", context)
    dataset = _require(el, "datSet", f"{context}/{name}")
    kind = (el.get("type") or kind_default).upper()
    if kind not in (GOOSE, RGOOSE, REPORT):
        raise SchemaViolation(f"{context}/{name}: unknown control block type {kind!r}")
    app_id_text = el.get("appID", "0")
    try:
        app_id = int(app_id_text, 0)
    except ValueError as exc:
        raise SchemaViolation(f"{context}/{name}: bad appID {app_id_text!r}") from exc
    return ControlBlock(kind=kind, name=name, dataset_ref=dataset, app_id=app_id)


def _parse_ldevice(el: ET.Element, ied: IedSection) -> LogicalDevice:
    name = el.get("inst") or el.get("name") or "LD0"
    ld = LogicalDevice(name=name)
    for tag, child in _children(el):
        if tag in ("LN", "LN0"):
            ld.logical_nodes.append(_parse_ln(child, f"{ied.name}/{name}"))
            for ctag, cchild in _children(child):
                if ctag == "DataSet":
                    ied.datasets.append(_parse_dataset(cchild, ied.name, f"{ied.name}/{name}"))
                elif ctag == "GSEControl":
                    ied.control_blocks.append(_parse_control_block(cchild, GOOSE, ied.name))
                elif ctag == "ReportControl":
                    ied.control_blocks.append(_parse_control_block(cchild, REPORT, ied.name))
        elif tag == "DataSet":
            ied.datasets.append(_parse_dataset(child, ied.name, f"{ied.name}/{name}"))
        elif tag == "GSEControl":
            ied.control_blocks.append(_parse_control_block(child, GOOSE, ied.name))
        elif tag == "ReportControl":
            ied.control_blocks.append(_parse_control_block(child, REPORT, ied.name))
    keys = [(ln.ln_class, ln.instance) for ln in ld.logical_nodes]
    if len(keys) != len(set(keys)):
        raise SchemaViolation(f"{ied.name}/{name}: duplicate (lnClass, inst) pair")
    return ld


def _parse_ied(el: ET.Element) -> IedSection:
    name = _require(el, "name", "IED")
    ied = IedSection(name=name, ied_type=(el.get("type") or "IED").upper())
    # LDevice may sit directly under IED or be wrapped in AccessPoint/Server.
    containers = [el]
    for tag, child in _children(el):
        if tag == "AccessPoint":
            containers.append(child)
            for ctag, cchild in _children(child):
                if ctag == "Server":
                    containers.append(cchild)
        elif tag == "Server":
            containers.append(child)
    for container in containers:
        for tag, child in _children(container):
            if tag == "LDevice":
                ied.logical_devices.append(_parse_ldevice(child, ied))
            elif container is el and tag not in ("AccessPoint", "Server"):
                ied.extras.append(_tostring(child))
    _check_unique([ld.name for ld in ied.logical_devices], "logical device", name)
    _check_unique([ds.name for ds in ied.datasets], "dataset", name)
    _check_unique([cb.name for cb in ied.control_blocks], "control block", name)
    return ied


# --- top level -------------------------------------------------------------------

def parse_scl(text: str, expected_kind: str, source: str | None = None) -> SclDocument:
    """Parse an SCL document and check it against the expected kind.

    Raises XmlSyntax for malformed XML, KindMismatch when the content
    contradicts ``expected_kind``, and SchemaViolation for structural
    problems (missing mandatory attributes, duplicate names, bad values).
    """
    if expected_kind not in DOCUMENT_KINDS:
        raise ValueError(f"unknown document kind {expected_kind!r}")
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise XmlSyntax(str(exc)) from exc
    if _strip_ns(root.tag) != "SCL":
        raise KindMismatch(f"root element is {_strip_ns(root.tag)!r}, expected SCL")

    doc = SclDocument(kind=expected_kind, header=Header(id="", version="1"), source=source)
    for tag, child in _children(root):
        if tag == "Header":
            doc.header = Header(id=child.get("id", ""), version=child.get("version", "1"))
        elif tag == "Substation":
            doc.processes.append(_parse_process(child, doc.defaults_applied))
        elif tag == "Communication":
            doc.communication = _parse_communication(child)
        elif tag == "IED":
            doc.ieds.append(_parse_ied(child))
        elif tag == "DataTypeTemplates":
            doc.data_type_templates = _tostring(child)
        else:
            doc.extras.append(_tostring(child))

    _check_unique([p.name for p in doc.processes], "process", "SCL")
    _check_unique([i.name for i in doc.ieds], "IED", "SCL")

    if expected_kind == SSD and not doc.processes:
        raise KindMismatch("SSD must declare at least one Substation section")
    if expected_kind == SED and not doc.processes:
        raise KindMismatch("SED must declare at least one Substation section")
    if expected_kind == ICD and len(doc.ieds) != 1:
        raise KindMismatch(f"ICD must declare exactly one IED section, found {len(doc.ieds)}")
    if expected_kind == SCD and doc.communication is None:
        raise KindMismatch("SCD must include a Communication section")
    return doc


# --- serialization ----------------------------------------------------------------

def _append_extras(parent: ET.Element, extras: list[str]) -> None:
    for raw in extras:
        parent.append(ET.fromstring(raw))


def _emit_process(proc: ProcessSection) -> ET.Element:
    el = ET.Element("Substation", {"name": proc.name})
    for vl in proc.voltage_levels:
        vel = ET.SubElement(el, "VoltageLevel", {
            "name": vl.name,
            "nomFreq": _fmt(vl.nom_freq),
            "numPhases": str(vl.num_phases),
        })
        volt = ET.SubElement(vel, "Voltage", {"unit": "V", "multiplier": "k"})
        volt.text = _fmt(vl.nominal_kv)
        for bay in vl.bays:
            bel = ET.SubElement(vel, "Bay", {"name": bay.name})
            for eq in bay.equipment:
                eel = ET.SubElement(bel, "ConductingEquipment",
                                    {"name": eq.name, "type": eq.ce_type})
                for t in eq.terminals:
                    attrs = {"connectivityNode": t.connectivity_node}
                    if t.voltage_level_name:
                        attrs["voltageLevelName"] = t.voltage_level_name
                    ET.SubElement(eel, "Terminal", attrs)
            for tr in bay.transformers:
                tel = ET.SubElement(bel, "PowerTransformer", {"name": tr.name, "type": "PTR"})
                for w in tr.windings:
                    wel = ET.SubElement(tel, "TransformerWinding", {"name": w.name, "type": "PTW"})
                    attrs = {"connectivityNode": w.terminal.connectivity_node}
                    if w.terminal.voltage_level_name:
                        attrs["voltageLevelName"] = w.terminal.voltage_level_name
                    ET.SubElement(wel, "Terminal", attrs)
            for cn in bay.connectivity_nodes:
                ET.SubElement(bel, "ConnectivityNode",
                              {"name": cn.rsplit("/", 1)[-1], "pathName": cn})
            _append_extras(bel, bay.extras)
        _append_extras(vel, vl.extras)
    _append_extras(el, proc.extras)
    return el


def _emit_communication(comm: CommunicationSection) -> ET.Element:
    el = ET.Element("Communication")
    for sn in comm.subnetworks:
        snel = ET.SubElement(el, "SubNetwork", {"name": sn.name})
        for ap in sn.connected_aps:
            apel = ET.SubElement(snel, "ConnectedAP",
                                 {"iedName": ap.ied_name, "apName": ap.ap_name})
            addr = ET.SubElement(apel, "Address")
            for ptype, value in (("IP", ap.address.ip),
                                 ("IP-SUBNET", ap.address.netmask),
                                 ("IP-GATEWAY", ap.address.gateway)):
                if value:
                    p = ET.SubElement(addr, "P", {"type": ptype})
                    p.text = value
            for pc in ap.phys_conns:
                pcel = ET.SubElement(apel, "PhysConn", {"type": "Connection"})
                port = ET.SubElement(pcel, "P", {"type": "Port"})
                port.text = pc.port
                cable = ET.SubElement(pcel, "P", {"type": "Cable"})
                cable.text = pc.cable
            _append_extras(apel, ap.extras)
        _append_extras(snel, sn.extras)
    _append_extras(el, comm.extras)
    return el


def _emit_ied(ied: IedSection) -> ET.Element:
    el = ET.Element("IED", {"name": ied.name, "type": ied.ied_type})
    ap = ET.SubElement(el, "AccessPoint", {"name": "AP1"})
    server = ET.SubElement(ap, "Server")
    datasets_done = False
    for ld in ied.logical_devices:
        ldel = ET.SubElement(server, "LDevice", {"inst": ld.name})
        for ln in ld.logical_nodes:
            tag = "LN0" if ln.ln_class == "LLN0" else "LN"
            lnel = ET.SubElement(ldel, tag, {"lnClass": ln.ln_class, "inst": str(ln.instance)})
            for do in ln.data_objects:
                doel = ET.SubElement(lnel, "DOI", {"name": do.name})
                for attr in do.attributes:
                    parent = doel
                    parts = attr.split(".")
                    for seg in parts[:-1]:
                        parent = ET.SubElement(parent, "SDI", {"name": seg})
                    ET.SubElement(parent, "DAI", {"name": parts[-1]})
            if ln.ln_class == "LLN0" and not datasets_done:
                _emit_datasets(lnel, ied)
                datasets_done = True
        if not datasets_done:
            _emit_datasets(ldel, ied)
            datasets_done = True
    if not datasets_done and (ied.datasets or ied.control_blocks):
        ldel = ET.SubElement(server, "LDevice", {"inst": "LD0"})
        _emit_datasets(ldel, ied)
    _append_extras(el, ied.extras)
    return el


def _emit_datasets(parent: ET.Element, ied: IedSection) -> None:
    for ds in ied.datasets:
        dsel = ET.SubElement(parent, "DataSet", {"name": ds.name})
        for member in ds.members:
            _, ln_token, rest = split_attribute_path(member)
            cls, inst = split_ln_token(ln_token)
            attrs = {"lnClass": cls, "lnInst": str(inst if inst is not None else 1),
                     "doName": rest[0]}
            if len(rest) > 1:
                attrs["daName"] = ".".join(rest[1:])
            ET.SubElement(dsel, "FCDA", attrs)
    for cb in ied.control_blocks:
        if cb.kind == REPORT:
            ET.SubElement(parent, "ReportControl", {"name": cb.name, "datSet": cb.dataset_ref})
        else:
            ET.SubElement(parent, "GSEControl", {
                "name": cb.name, "datSet": cb.dataset_ref,
                "appID": str(cb.app_id), "type": cb.kind,
            })


def _fmt(x: float) -> str:
    return repr(float(x)) if not float(x).is_integer() else str(int(x))


def serialize_scl(doc: SclDocument) -> str:
    """Serialize a typed document back to SCL XML (retained subtrees verbatim)."""
    root = ET.Element("SCL")
    ET.SubElement(root, "Header", {"id": doc.header.id, "version": doc.header.version})
    for proc in doc.processes:
        root.append(_emit_process(proc))
    if doc.communication is not None:
        root.append(_emit_communication(doc.communication))
    for ied in doc.ieds:
        root.append(_emit_ied(ied))
    if doc.data_type_templates:
        root.append(ET.fromstring(doc.data_type_templates))
    _append_extras(root, doc.extras)
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"
