"""Ready-made model bundles used by the demos and the test suite.

Two families live here.  ``build_substation_bundle`` produces a single
nine-device station; ``build_three_substation_bundle`` chains three such
stations with tie lines and inter-switch trunks for a 45-device system.
``make_protection_bundle`` builds minimal two-bus systems whose load
sequences sweep one protection function from quiet through its alarm
band and across the trip level.  All builders return a filename->text
mapping; ``write_bundle`` drops one onto disk for the CLI.
"""

from __future__ import annotations

import json
import os

# Catalog name and impedance used by the two-bus sweeps.  A purely
# reactive cable keeps the closed-form voltage solution exact: on the
# 100 MVA / 10 kV base one ohm is one per-unit, so 0.1 ohm/km over one
# kilometre is x = 0.1 pu.
TOY_CABLE_TYPE = "SIM 0R X0.1"
TOY_CABLE_TABLE = {TOY_CABLE_TYPE: {"r_ohm_per_km": 0.0, "x_ohm_per_km": 0.1}}


def _terminal(path: str) -> str:
    return f'<Terminal connectivityNode="{path}"/>'


def _cn(path: str) -> str:
    name = path.rsplit("/", 1)[1]
    return f'<ConnectivityNode name="{name}" pathName="{path}"/>'


def _equipment(name: str, ce_type: str, *nodes: str) -> str:
    terms = "".join(_terminal(n) for n in nodes)
    return (f'<ConductingEquipment name="{name}" type="{ce_type}">'
            f"{terms}</ConductingEquipment>")


def _substation_ssd(sub: str) -> str:
    """One station: generator feed, 66/11 kV transformer, two feeders."""
    v66 = f"{sub}/66kV"
    v11 = f"{sub}/11kV"
    gen_bay = (
        f'<Bay name="GenBay">'
        + _equipment(f"{sub}_G0", "GEN", f"{v66}/GenBay/NG")
        + _equipment(f"{sub}_CB0", "CBR", f"{v66}/GenBay/NG",
                     f"{v66}/GenBay/N66")
        + _cn(f"{v66}/GenBay/NG") + _cn(f"{v66}/GenBay/N66")
        + f'<PowerTransformer name="{sub}_T1">'
        + f'<TransformerWinding name="W1">'
          f'<Terminal connectivityNode="{v66}/GenBay/N66" '
          f'voltageLevelName="66kV"/></TransformerWinding>'
        + f'<TransformerWinding name="W2">'
          f'<Terminal connectivityNode="{v11}/MainBay/N11" '
          f'voltageLevelName="11kV"/></TransformerWinding>'
        + "</PowerTransformer></Bay>")
    feeders = []
    for tag in ("A", "B"):
        base = f"{v11}/Feeder{tag}"
        feeders.append(
            f'<Bay name="Feeder{tag}">'
            + _equipment(f"{sub}_LN{tag}", "CAB", f"{v11}/MainBay/N11",
                         f"{base}/NF")
            + _equipment(f"{sub}_CB{tag}", "CBR", f"{base}/NF",
                         f"{base}/NL")
            + _equipment(f"{sub}_L{tag}", "IFL", f"{base}/NL")
            + _cn(f"{base}/NF") + _cn(f"{base}/NL")
            + "</Bay>")
    return (
        f'<SCL><Header id="{sub.lower()}-ssd"/>'
        f'<Substation name="{sub}">'
        f'<VoltageLevel name="66kV" nomFreq="50" numPhases="3">'
        f'<Voltage unit="V" multiplier="k">66</Voltage>'
        + gen_bay
        + "</VoltageLevel>"
        f'<VoltageLevel name="11kV" nomFreq="50" numPhases="3">'
        f'<Voltage unit="V" multiplier="k">11</Voltage>'
        f'<Bay name="MainBay">{_cn(f"{v11}/MainBay/N11")}</Bay>'
        + "".join(feeders)
        + "</VoltageLevel></Substation></SCL>")


def _tie_sed(a: str, b: str, pair: str) -> str:
    """Tie bays spliced into stations a and b, joined by one 66 kV cable."""
    na = f"{a}/66kV/TieBay{pair}/NT"
    nb = f"{b}/66kV/TieBay{pair}/NT"
    bay_a = (
        f'<Bay name="TieBay{pair}">'
        + _equipment(f"{a}_TIE{pair}", "CBR", f"{a}/66kV/GenBay/N66", na)
        + _equipment(f"TIELN{pair}", "CAB", na, nb)
        + _cn(na) + "</Bay>")
    bay_b = (
        f'<Bay name="TieBay{pair}">'
        + _equipment(f"{b}_TIE{pair}", "CBR", f"{b}/66kV/GenBay/N66", nb)
        + _cn(nb) + "</Bay>")
    return (
        f'<SCL><Header id="tie-{pair}"/>'
        f'<Substation name="{a}"><VoltageLevel name="66kV" nomFreq="50" '
        f'numPhases="3"><Voltage unit="V" multiplier="k">66</Voltage>'
        f"{bay_a}</VoltageLevel></Substation>"
        f'<Substation name="{b}"><VoltageLevel name="66kV" nomFreq="50" '
        f'numPhases="3"><Voltage unit="V" multiplier="k">66</Voltage>'
        f"{bay_b}</VoltageLevel></Substation></SCL>")


_MEAS = '<LN lnClass="MMXU" inst="1"/>'
_CB = '<LN lnClass="XCBR" inst="1"/>'


def _icd(name: str, body: str) -> str:
    return (f'<SCL><Header id="{name.lower()}-icd"/>'
            f'<IED name="{name}" type="IED">'
            f'<AccessPoint name="AP1"><Server><LDevice inst="LD0">'
            f"{body}</LDevice></Server></AccessPoint></IED></SCL>")


def _pos_dataset(app_id: int, cb_name: str = "tiegcb") -> str:
    return (
        '<LN0 lnClass="LLN0" inst="1">'
        '<DataSet name="DSPos">'
        '<FCDA lnClass="XCBR" lnInst="1" doName="Pos" daName="stVal"/>'
        "</DataSet>"
        f'<GSEControl name="{cb_name}" datSet="DSPos" '
        f'appID="{app_id}" type="RGOOSE"/>'
        "</LN0>")


def _current_dataset(app_id: int) -> str:
    return (
        '<LN0 lnClass="LLN0" inst="1">'
        '<DataSet name="DSMeas">'
        '<FCDA lnClass="MMXU" lnInst="1" doName="A" daName="phsA.cVal"/>'
        "</DataSet>"
        f'<GSEControl name="measgcb" datSet="DSMeas" '
        f'appID="{app_id}" type="RGOOSE"/>'
        "</LN0>")


def _station_device_names(sub: str, tie_controller: str) -> list[str]:
    """Fifteen device names with the tie controller pinned first."""
    names = [tie_controller]
    n = 0
    while len(names) < 15:
        candidate = f"{sub}_IED{n}"
        if candidate != tie_controller:
            names.append(candidate)
        n += 1
    return names


def _station_devices(sub: str, idx: int, tie_controller: str,
                     watch: str | None, second_tie: bool) -> dict[str, str]:
    """Device descriptions for one station keyed by device name."""
    app_pos = 0x1000 + idx
    app_meas = 0x2000 + idx
    d: dict[str, str] = {}
    tie_body = _pos_dataset(app_pos) + _CB + _MEAS
    if watch is not None:
        tie_body += '<LN lnClass="CILO" inst="1"/>'
    d[tie_controller] = _icd(tie_controller, tie_body)
    names = _station_device_names(sub, tie_controller)
    roles = {
        names[1]: _CB + '<LN lnClass="PTOC" inst="1"/>' + _MEAS,
        names[2]: _MEAS + '<LN lnClass="PTOV" inst="1"/>',
        names[3]: _MEAS + '<LN lnClass="PTUV" inst="1"/>',
        names[4]: _CB + _MEAS + '<LN lnClass="PTOC" inst="1"/>',
        names[5]: _current_dataset(app_meas) + _MEAS,
        names[6]: _MEAS + '<LN lnClass="PDIF" inst="1"/>',
        names[7]: _CB + _MEAS + '<LN lnClass="PTOC" inst="1"/>',
        names[8]: _MEAS,
        names[9]: _MEAS + '<LN lnClass="PDIS" inst="1"/>',
        names[10]: _MEAS,
        names[11]: '<LN lnClass="CSWI" inst="1"/>' + _CB,
        names[12]: _MEAS,
        names[13]: _MEAS + '<LN lnClass="PTUV" inst="2"/>',
    }
    if second_tie:
        roles[names[14]] = _pos_dataset(app_pos + 0x100, "tie2gcb") + _CB
    else:
        roles[names[14]] = _MEAS
    for name, body in roles.items():
        d[name] = _icd(name, body)
    return d


def _station_mappings(sub: str, tie_controller: str, names: list[str],
                      tie_cb: str, second_tie_cb: str | None) -> list[str]:
    m: list[str] = []

    def pair(phys: str, attr: str) -> None:
        m.append(f'<Mapping physical_path="{phys}" attribute_path="{attr}"/>')

    pair(f"{tie_cb}.pos", f"{tie_controller}.XCBR1.Pos.stVal")
    pair(f"{sub}_G0.vm_pu", f"{tie_controller}.MMXU1.PhV.phsA.cVal")
    pair(f"{sub}_CB0.pos", f"{names[1]}.XCBR1.Pos.stVal")
    pair(f"{sub}_G0.i_ka", f"{names[1]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_G0.vm_pu", f"{names[2]}.MMXU1.PhV.phsA.cVal")
    pair(f"{sub}_LA.vm_pu", f"{names[3]}.MMXU1.PhV.phsA.cVal")
    pair(f"{sub}_CBA.pos", f"{names[4]}.XCBR1.Pos.stVal")
    pair(f"{sub}_LNA.i_ka", f"{names[4]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_LA.i_ka", f"{names[5]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_LNA.i_ka", f"{names[6]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_CBB.pos", f"{names[7]}.XCBR1.Pos.stVal")
    pair(f"{sub}_LNB.i_ka", f"{names[7]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_LB.i_ka", f"{names[8]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_LB.v_kv", f"{names[9]}.MMXU1.PhV.phsA.cVal")
    pair(f"{sub}_LNB.i_ka", f"{names[9]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_T1.i_ka", f"{names[10]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_CB0.pos", f"{names[11]}.XCBR1.Pos.stVal")
    pair(f"{sub}_G0.p_mw", f"{names[12]}.MMXU1.TotW.mag")
    pair(f"{sub}_LB.vm_pu", f"{names[13]}.MMXU1.PhV.phsA.cVal")
    if second_tie_cb is not None:
        pair(f"{second_tie_cb}.pos", f"{names[14]}.XCBR1.Pos.stVal")
    else:
        pair(f"{sub}_LA.vm_pu", f"{names[14]}.MMXU1.PhV.phsA.cVal")
    return m


def _station_thresholds(sub: str, tie_controller: str, names: list[str],
                        watch: str | None) -> list[str]:
    """Settled wide so nominal runs stay quiet."""
    t = []
    if watch is not None:
        t.append(f'<Threshold ied="{tie_controller}" ln_class="CILO" '
                 f'instance="1" source_cb="{watch}.XCBR1.Pos.stVal"/>')
    t.append(f'<Threshold ied="{names[1]}" ln_class="PTOC" instance="1" '
             f'alarm_threshold="2000" trip_threshold="3000" units="A" '
             f'target_cb="{sub}_CB0"/>')
    t.append(f'<Threshold ied="{names[2]}" ln_class="PTOV" instance="1" '
             f'alarm_threshold="1.15" trip_threshold="1.25" units="pu" '
             f'target_cb="{sub}_CB0"/>')
    t.append(f'<Threshold ied="{names[3]}" ln_class="PTUV" instance="1" '
             f'alarm_threshold="0.80" trip_threshold="0.70" units="pu" '
             f'target_cb="{sub}_CBA"/>')
    t.append(f'<Threshold ied="{names[4]}" ln_class="PTOC" instance="1" '
             f'alarm_threshold="1500" trip_threshold="2500" units="A" '
             f'target_cb="{sub}_CBA"/>')
    t.append(f'<Threshold ied="{names[6]}" ln_class="PDIF" instance="1" '
             f'alarm_threshold="700" trip_threshold="1200" units="A" '
             f'target_cb="{sub}_CBA" '
             f'partner_current="{names[5]}.MMXU1.A.phsA.cVal"/>')
    t.append(f'<Threshold ied="{names[7]}" ln_class="PTOC" instance="1" '
             f'alarm_threshold="1500" trip_threshold="2500" units="A" '
             f'target_cb="{sub}_CBB"/>')
    t.append(f'<Threshold ied="{names[9]}" ln_class="PDIS" instance="1" '
             f'units="ohm" zone_impedance_ohm="0.8" alarm_threshold="1.2" '
             f'monitored="{names[9]}.MMXU1.PhV.phsA.cVal '
             f'{names[9]}.MMXU1.A.phsA.cVal" '
             f'target_cb="{sub}_CBB" min_pickup="0.05"/>')
    t.append(f'<Threshold ied="{names[13]}" ln_class="PTUV" instance="2" '
             f'alarm_threshold="0.80" trip_threshold="0.70" units="pu" '
             f'target_cb="{sub}_CBB"/>')
    return t


def _load_ripple(step: int, k: int) -> float:
    """Small deterministic load wiggle so measurements keep changing."""
    return 1.0 + 0.02 * (((step * 7 + k * 3) % 5) - 2) / 2.0


def _station_params(sub: str, idx: int, n_steps: int, slack: bool,
                    ties: list[str]) -> list[str]:
    seq_a = " ".join(f"{_load_ripple(s, idx):.4f}" for s in range(n_steps))
    seq_b = " ".join(f"{_load_ripple(s, idx + 1):.4f}" for s in range(n_steps))
    rows = [
        f'<Component component_ref="{sub}_G0" vm_pu="1.0" p_mw="18" '
        f'is_slack="{"true" if slack else "false"}"/>',
        f'<Component component_ref="{sub}_CB0" closed="true"/>',
        f'<Component component_ref="{sub}_T1" sn_mva="25" vk_percent="10"/>',
        f'<Component component_ref="{sub}_LNA" length_km="2" '
        f'std_type="NA2XS2Y 1x240"/>',
        f'<Component component_ref="{sub}_CBA" closed="true"/>',
        f'<Component component_ref="{sub}_LA" p_mw="6" q_mvar="1.5" '
        f'data_sequence="{seq_a}"/>',
        f'<Component component_ref="{sub}_LNB" length_km="3" '
        f'std_type="NA2XS2Y 1x240"/>',
        f'<Component component_ref="{sub}_CBB" closed="true"/>',
        f'<Component component_ref="{sub}_LB" p_mw="5" q_mvar="1.0" '
        f'data_sequence="{seq_b}"/>',
    ]
    for tie in ties:
        rows.append(f'<Component component_ref="{tie}" closed="true"/>')
    return rows


def _station_scd(sub: str, idx: int, device_names: list[str],
                 infra: list[tuple[str, str, str]], trunks: list[str],
                 trunk_offset: int = 20) -> str:
    """Communication section: star of devices on one switch plus trunks."""
    sw = f"{sub}_SW"
    parts = [f'<SCL><Header id="{sub.lower()}-scd"/>']
    parts.append(f'<IED name="{sw}" type="SWITCH"/>')
    for name, kind, _ip in infra:
        parts.append(f'<IED name="{name}" type="{kind}"/>')
    parts.append("<Communication>")
    parts.append(f'<SubNetwork name="SN_{sub}">')
    sw_conns: list[tuple[str, str]] = []
    port = 1
    aps = []
    for n, name in enumerate(device_names):
        cable = f"{sub}_C{n}"
        aps.append(
            f'<ConnectedAP iedName="{name}" apName="AP1">'
            f'<Address><P type="IP">10.0.{idx}.{10 + n}</P>'
            f'<P type="IP-SUBNET">255.255.255.0</P>'
            f'<P type="IP-GATEWAY">10.0.{idx}.1</P></Address>'
            f'<PhysConn type="Connection"><P type="Port">1</P>'
            f'<P type="Cable">{cable}</P></PhysConn></ConnectedAP>')
        sw_conns.append((str(port), cable))
        port += 1
    for n, (name, _kind, ip) in enumerate(infra):
        cable = f"{sub}_X{n}"
        aps.append(
            f'<ConnectedAP iedName="{name}" apName="AP1">'
            f'<Address><P type="IP">{ip}</P>'
            f'<P type="IP-SUBNET">255.255.255.0</P>'
            f'<P type="IP-GATEWAY">10.0.{idx}.1</P></Address>'
            f'<PhysConn type="Connection"><P type="Port">1</P>'
            f'<P type="Cable">{cable}</P></PhysConn></ConnectedAP>')
        sw_conns.append((str(port), cable))
        port += 1
    for t, trunk in enumerate(trunks):
        sw_conns.append((str(trunk_offset + t), trunk))
    sw_ap = [f'<ConnectedAP iedName="{sw}" apName="AP1">'
             f'<Address><P type="IP">10.0.{idx}.1</P>'
             f'<P type="IP-SUBNET">255.255.255.0</P>'
             f'<P type="IP-GATEWAY">10.0.{idx}.1</P></Address>']
    for p, cable in sw_conns:
        sw_ap.append(f'<PhysConn type="Connection"><P type="Port">{p}</P>'
                     f'<P type="Cable">{cable}</P></PhysConn>')
    sw_ap.append("</ConnectedAP>")
    parts.extend(aps)
    parts.append("".join(sw_ap))
    parts.append("</SubNetwork></Communication></SCL>")
    return "".join(parts)


def build_three_substation_bundle(n_steps: int = 12) -> dict[str, str]:
    """Three stations, two tie lines, 45 protection devices."""
    subs = ("S1", "S2", "S3")
    tie_controllers = {"S1": "S1_IED22", "S2": "S2_IED0", "S3": "S3_IED0"}
    watches = {"S1": None, "S2": "S1_IED22", "S3": "S2_IED14"}
    tie_cbs = {"S1": "S1_TIE12", "S2": "S2_TIE12", "S3": "S3_TIE23"}
    second_tie = {"S1": False, "S2": True, "S3": False}

    files: dict[str, str] = {}
    mappings: list[str] = []
    thresholds: list[str] = []
    params: list[str] = []
    all_names: dict[str, list[str]] = {}

    for idx, sub in enumerate(subs, start=1):
        files[f"{sub.lower()}.ssd"] = _substation_ssd(sub)
        controller = tie_controllers[sub]
        names = _station_device_names(sub, controller)
        all_names[sub] = names
        for name, text in _station_devices(
                sub, idx, controller, watches[sub],
                second_tie[sub]).items():
            files[f"{name.lower()}.icd"] = text
        second_cb = "S2_TIE23" if sub == "S2" else None
        mappings.extend(_station_mappings(sub, controller, names,
                                          tie_cbs[sub], second_cb))
        thresholds.extend(_station_thresholds(sub, controller, names,
                                              watches[sub]))
        ties = [tie_cbs[sub]] + (["S2_TIE23"] if sub == "S2" else [])
        params.extend(_station_params(sub, idx, n_steps, slack=(sub == "S1"),
                                      ties=ties))
        infra = []
        if sub == "S1":
            infra = [("PLC1", "PLC", "10.0.1.200"),
                     ("GW1", "GATEWAY", "10.0.1.201")]
        trunks = {"S1": ["TRUNK12"], "S2": ["TRUNK12", "TRUNK23"],
                  "S3": ["TRUNK23"]}[sub]
        files[f"{sub.lower()}.scd"] = _station_scd(
            sub, idx, names, infra, trunks)

    files["tie12.sed"] = _tie_sed("S1", "S2", "12")
    files["tie23.sed"] = _tie_sed("S2", "S3", "23")
    params.append('<Component component_ref="TIELN12" length_km="5" '
                  'std_type="NA2XS2Y 1x240"/>')
    params.append('<Component component_ref="TIELN23" length_km="5" '
                  'std_type="NA2XS2Y 1x240"/>')

    files["power_params.xml"] = (
        '<PowerParams base_mva="100">' + "".join(params) + "</PowerParams>")
    files["cp_mapping.xml"] = (
        "<CPMapping>" + "".join(mappings) + "</CPMapping>")
    files["thresholds.xml"] = (
        "<Thresholds>" + "".join(thresholds) + "</Thresholds>")
    files["scada_config.xml"] = _scada_config(subs, tie_controllers, all_names)
    files["plc_program.xml"] = _supervisory_plc(all_names["S1"])
    return files


def _scada_config(subs, tie_controllers, all_names) -> str:
    points = []
    for sub in subs:
        names = all_names[sub]
        points.append(f'<Point point_name="{sub}.bus66.vm" '
                      f'attribute_path="{names[2]}.MMXU1.PhV.phsA.cVal"/>')
        points.append(f'<Point point_name="{sub}.feederA.i" '
                      f'attribute_path="{names[4]}.MMXU1.A.phsA.cVal"/>')
        points.append(f'<Point point_name="{sub}.cb0.pos" writable="true" '
                      f'attribute_path="{names[1]}.XCBR1.Pos.stVal"/>')
        points.append(
            f'<Point point_name="{sub}.tie.pos" writable="true" '
            f'attribute_path="{tie_controllers[sub]}.XCBR1.Pos.stVal"/>')
    return "<ScadaConfig>" + "".join(points) + "</ScadaConfig>"


def _supervisory_plc(s1_names: list[str]) -> str:
    """Opens the S1 generator breaker if the 66 kV voltage runs away."""
    meter = s1_names[2]
    breaker = s1_names[11]
    return (
        '<PlcProgram name="PLC1" scan_interval_ticks="5">'
        f'<Variable name="V" direction="in" '
        f'binding="{meter}.MMXU1.PhV.phsA.cVal"/>'
        f'<Variable name="OK" direction="out" '
        f'binding="{breaker}.XCBR1.Pos.stVal"/>'
        '<Statement target_var="OK" expression="not (V &gt; 1.4)"/>'
        "</PlcProgram>")


def build_substation_bundle(n_steps: int = 12) -> dict[str, str]:
    """Single station with nine devices: the small-scale variant."""
    sub = "S1"
    files: dict[str, str] = {}
    files["s1.ssd"] = _substation_ssd(sub)
    names = [f"{sub}_IED{n}" for n in range(9)]
    app_meas = 0x2001
    bodies = {
        names[0]: _CB + _MEAS,
        names[1]: _MEAS + '<LN lnClass="PTOV" inst="1"/>',
        names[2]: _MEAS + '<LN lnClass="PTUV" inst="1"/>',
        names[3]: _CB + _MEAS + '<LN lnClass="PTOC" inst="1"/>',
        names[4]: _current_dataset(app_meas) + _MEAS,
        names[5]: _MEAS + '<LN lnClass="PDIF" inst="1"/>',
        names[6]: _CB + _MEAS + '<LN lnClass="PTOC" inst="1"/>',
        names[7]: _MEAS + '<LN lnClass="PDIS" inst="1"/>',
        names[8]: _MEAS,
    }
    for name, body in bodies.items():
        files[f"{name.lower()}.icd"] = _icd(name, body)
    mappings: list[str] = []

    def pair(phys: str, attr: str) -> None:
        mappings.append(
            f'<Mapping physical_path="{phys}" attribute_path="{attr}"/>')

    pair(f"{sub}_CB0.pos", f"{names[0]}.XCBR1.Pos.stVal")
    pair(f"{sub}_G0.i_ka", f"{names[0]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_G0.vm_pu", f"{names[1]}.MMXU1.PhV.phsA.cVal")
    pair(f"{sub}_LA.vm_pu", f"{names[2]}.MMXU1.PhV.phsA.cVal")
    pair(f"{sub}_CBA.pos", f"{names[3]}.XCBR1.Pos.stVal")
    pair(f"{sub}_LNA.i_ka", f"{names[3]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_LA.i_ka", f"{names[4]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_LNA.i_ka", f"{names[5]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_CBB.pos", f"{names[6]}.XCBR1.Pos.stVal")
    pair(f"{sub}_LNB.i_ka", f"{names[6]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_LB.v_kv", f"{names[7]}.MMXU1.PhV.phsA.cVal")
    pair(f"{sub}_LNB.i_ka", f"{names[7]}.MMXU1.A.phsA.cVal")
    pair(f"{sub}_LB.i_ka", f"{names[8]}.MMXU1.A.phsA.cVal")
    files["cp_mapping.xml"] = ("<CPMapping>" + "".join(mappings)
                               + "</CPMapping>")
    thresholds = [
        f'<Threshold ied="{names[1]}" ln_class="PTOV" instance="1" '
        f'alarm_threshold="1.15" trip_threshold="1.25" units="pu" '
        f'target_cb="{sub}_CB0"/>',
        f'<Threshold ied="{names[2]}" ln_class="PTUV" instance="1" '
        f'alarm_threshold="0.80" trip_threshold="0.70" units="pu" '
        f'target_cb="{sub}_CBA"/>',
        f'<Threshold ied="{names[3]}" ln_class="PTOC" instance="1" '
        f'alarm_threshold="1500" trip_threshold="2500" units="A" '
        f'target_cb="{sub}_CBA"/>',
        f'<Threshold ied="{names[5]}" ln_class="PDIF" instance="1" '
        f'alarm_threshold="700" trip_threshold="1200" units="A" '
        f'target_cb="{sub}_CBA" '
        f'partner_current="{names[4]}.MMXU1.A.phsA.cVal"/>',
        f'<Threshold ied="{names[6]}" ln_class="PTOC" instance="1" '
        f'alarm_threshold="1500" trip_threshold="2500" units="A" '
        f'target_cb="{sub}_CBB"/>',
        f'<Threshold ied="{names[7]}" ln_class="PDIS" instance="1" '
        f'units="ohm" zone_impedance_ohm="0.8" alarm_threshold="1.2" '
        f'monitored="{names[7]}.MMXU1.PhV.phsA.cVal '
        f'{names[7]}.MMXU1.A.phsA.cVal" '
        f'target_cb="{sub}_CBB" min_pickup="0.05"/>',
    ]
    files["thresholds.xml"] = ("<Thresholds>" + "".join(thresholds)
                               + "</Thresholds>")
    files["power_params.xml"] = (
        '<PowerParams base_mva="100">'
        + "".join(_station_params(sub, 1, n_steps, slack=True, ties=[]))
        + "</PowerParams>")
    files["s1.scd"] = _station_scd(
        sub, 1, names, [("GW1", "GATEWAY", "10.0.1.201")], [])
    files["scada_config.xml"] = (
        "<ScadaConfig>"
        f'<Point point_name="S1.bus66.vm" '
        f'attribute_path="{names[1]}.MMXU1.PhV.phsA.cVal"/>'
        f'<Point point_name="S1.feederA.i" '
        f'attribute_path="{names[3]}.MMXU1.A.phsA.cVal"/>'
        f'<Point point_name="S1.cb0.pos" writable="true" '
        f'attribute_path="{names[0]}.XCBR1.Pos.stVal"/>'
        f'<Point point_name="S1.cbA.pos" writable="true" '
        f'attribute_path="{names[3]}.XCBR1.Pos.stVal"/>'
        "</ScadaConfig>")
    return files


# -- focused two-bus protection sweeps ----------------------------------------------

_SWEEPS = {
    "PTOV": dict(p=0.0, q=100.0, mult="0 -1.0 -1.5", quantity="vm_pu",
                 thr='alarm_threshold="1.05" trip_threshold="1.10" units="pu"'),
    "PTUV": dict(p=0.0, q=100.0, mult="0 0.5 1.0", quantity="vm_pu",
                 thr='alarm_threshold="0.95" trip_threshold="0.90" units="pu"'),
    "PTOC": dict(p=30.0, q=0.0, mult="1 2 3", quantity="i_ka",
                 thr='alarm_threshold="3000" trip_threshold="5000" units="A"'),
}


def make_protection_bundle(kind: str) -> dict[str, str]:
    """Two-bus system whose three-step load sweep crosses one function.

    The first step stays quiet, the second lands between the alarm and
    trip levels, the third crosses the trip level.  The differential
    variant instead closes a breaker onto an unmetered parallel load.
    """
    if kind in _SWEEPS:
        return _sweep_two_bus(kind, **_SWEEPS[kind])
    if kind == "PDIF":
        return _pdif_bundle()
    if kind == "PDIS":
        return _pdis_bundle()
    raise ValueError(f"no sweep defined for {kind!r}")


def _two_bus_ssd() -> str:
    v = "T/10kV"
    return (
        '<SCL><Header id="toy-ssd"/>'
        '<Substation name="T">'
        '<VoltageLevel name="10kV" nomFreq="50" numPhases="3">'
        '<Voltage unit="V" multiplier="k">10</Voltage>'
        '<Bay name="B1">'
        + _equipment("G", "GEN", f"{v}/B1/N1")
        + _cn(f"{v}/B1/N1")
        + "</Bay>"
        '<Bay name="B2">'
        + _equipment("LN1", "CAB", f"{v}/B1/N1", f"{v}/B2/N2")
        + _equipment("CB1", "CBR", f"{v}/B2/N2", f"{v}/B2/N3")
        + _equipment("L1", "IFL", f"{v}/B2/N3")
        + _cn(f"{v}/B2/N2") + _cn(f"{v}/B2/N3")
        + "</Bay></VoltageLevel></Substation></SCL>")


def _toy_scd(device_names: list[str]) -> str:
    return _station_scd("T", 9, device_names,
                        [("GW1", "GATEWAY", "10.0.9.201")], [])


def _meas_attr(quantity: str) -> str:
    if quantity in ("v_kv", "vm_pu"):
        return "MMXU1.PhV.phsA.cVal"
    return "MMXU1.A.phsA.cVal"


def _sweep_two_bus(kind: str, p: float, q: float, mult: str,
                   quantity: str, thr: str) -> dict[str, str]:
    files = {"t.ssd": _two_bus_ssd()}
    prot, meter = "T_IED0", "T_IED1"
    files["t_ied0.icd"] = _icd(
        prot, _CB + _MEAS + f'<LN lnClass="{kind}" inst="1"/>')
    files["t_ied1.icd"] = _icd(meter, _MEAS)
    source = "L1" if quantity in ("v_kv", "vm_pu") else "LN1"
    files["cp_mapping.xml"] = (
        "<CPMapping>"
        f'<Mapping physical_path="CB1.pos" '
        f'attribute_path="{prot}.XCBR1.Pos.stVal"/>'
        f'<Mapping physical_path="{source}.{quantity}" '
        f'attribute_path="{prot}.{_meas_attr(quantity)}"/>'
        f'<Mapping physical_path="L1.i_ka" '
        f'attribute_path="{meter}.MMXU1.A.phsA.cVal"/>'
        "</CPMapping>")
    files["thresholds.xml"] = (
        "<Thresholds>"
        f'<Threshold ied="{prot}" ln_class="{kind}" instance="1" {thr} '
        f'target_cb="CB1"/>'
        "</Thresholds>")
    files["power_params.xml"] = (
        '<PowerParams base_mva="100">'
        '<Component component_ref="G" vm_pu="1.0" is_slack="true"/>'
        f'<Component component_ref="LN1" length_km="1" '
        f'std_type="{TOY_CABLE_TYPE}"/>'
        '<Component component_ref="CB1" closed="true"/>'
        f'<Component component_ref="L1" p_mw="{p}" q_mvar="{q}" '
        f'data_sequence="{mult}"/>'
        "</PowerParams>")
    files["s.scd"] = _toy_scd([prot, meter])
    files["cable_table.json"] = json.dumps(TOY_CABLE_TABLE, indent=2)
    files["scada_config.xml"] = (
        "<ScadaConfig>"
        f'<Point point_name="T.meas" '
        f'attribute_path="{prot}.{_meas_attr(quantity)}"/>'
        f'<Point point_name="T.cb1.pos" writable="true" '
        f'attribute_path="{prot}.XCBR1.Pos.stVal"/>'
        "</ScadaConfig>")
    return files


def _pdif_bundle() -> dict[str, str]:
    """A switched-in parallel load imbalances the metered line/load pair."""
    v = "T/10kV"
    ssd = (
        '<SCL><Header id="toy-ssd"/>'
        '<Substation name="T">'
        '<VoltageLevel name="10kV" nomFreq="50" numPhases="3">'
        '<Voltage unit="V" multiplier="k">10</Voltage>'
        '<Bay name="B1">'
        + _equipment("G", "GEN", f"{v}/B1/N1")
        + _cn(f"{v}/B1/N1")
        + "</Bay>"
        '<Bay name="B2">'
        + _equipment("LN1", "CAB", f"{v}/B1/N1", f"{v}/B2/N2")
        + _equipment("L1", "IFL", f"{v}/B2/N2")
        + _equipment("SW_X", "CBR", f"{v}/B2/N2", f"{v}/B2/N4")
        + _equipment("LX", "IFL", f"{v}/B2/N4")
        + _cn(f"{v}/B2/N2") + _cn(f"{v}/B2/N4")
        + "</Bay></VoltageLevel></Substation></SCL>")
    prot, meter = "T_IED0", "T_IED1"
    files = {"t.ssd": ssd}
    files["t_ied0.icd"] = _icd(
        prot, _CB + _MEAS + '<LN lnClass="PDIF" inst="1"/>')
    files["t_ied1.icd"] = _icd(meter, _current_dataset(0x2101) + _MEAS)
    files["cp_mapping.xml"] = (
        "<CPMapping>"
        f'<Mapping physical_path="SW_X.pos" '
        f'attribute_path="{prot}.XCBR1.Pos.stVal"/>'
        f'<Mapping physical_path="LN1.i_ka" '
        f'attribute_path="{prot}.MMXU1.A.phsA.cVal"/>'
        f'<Mapping physical_path="L1.i_ka" '
        f'attribute_path="{meter}.MMXU1.A.phsA.cVal"/>'
        "</CPMapping>")
    files["thresholds.xml"] = (
        "<Thresholds>"
        f'<Threshold ied="{prot}" ln_class="PDIF" instance="1" '
        f'alarm_threshold="300" trip_threshold="800" units="A" '
        f'target_cb="SW_X" '
        f'partner_current="{meter}.MMXU1.A.phsA.cVal"/>'
        "</Thresholds>")
    files["power_params.xml"] = (
        '<PowerParams base_mva="100">'
        '<Component component_ref="G" vm_pu="1.0" is_slack="true"/>'
        f'<Component component_ref="LN1" length_km="1" '
        f'std_type="{TOY_CABLE_TYPE}"/>'
        '<Component component_ref="SW_X" closed="false" '
        'data_sequence="0 1 1"/>'
        '<Component component_ref="L1" p_mw="30" q_mvar="0"/>'
        '<Component component_ref="LX" p_mw="20" q_mvar="0" '
        'data_sequence="0 0.4 1.0"/>'
        "</PowerParams>")
    files["s.scd"] = _toy_scd([prot, meter])
    files["cable_table.json"] = json.dumps(TOY_CABLE_TABLE, indent=2)
    files["scada_config.xml"] = (
        "<ScadaConfig>"
        f'<Point point_name="T.line.i" '
        f'attribute_path="{prot}.MMXU1.A.phsA.cVal"/>'
        "</ScadaConfig>")
    return files


def _pdis_bundle() -> dict[str, str]:
    """Impedance staircase: rising feeder load walks into the zone."""
    files = _sweep_two_bus("PDIS", p=10.0, q=0.0, mult="1 3 6",
                           quantity="v_kv", thr="")
    prot = "T_IED0"
    files["cp_mapping.xml"] = (
        "<CPMapping>"
        f'<Mapping physical_path="CB1.pos" '
        f'attribute_path="{prot}.XCBR1.Pos.stVal"/>'
        f'<Mapping physical_path="L1.v_kv" '
        f'attribute_path="{prot}.MMXU1.PhV.phsA.cVal"/>'
        f'<Mapping physical_path="LN1.i_ka" '
        f'attribute_path="{prot}.MMXU1.A.phsA.cVal"/>'
        f'<Mapping physical_path="L1.i_ka" '
        f'attribute_path="T_IED1.MMXU1.A.phsA.cVal"/>'
        "</CPMapping>")
    files["thresholds.xml"] = (
        "<Thresholds>"
        f'<Threshold ied="{prot}" ln_class="PDIS" instance="1" '
        f'units="ohm" zone_impedance_ohm="2.0" alarm_threshold="4.0" '
        f'min_pickup="0.1" target_cb="CB1" '
        f'monitored="{prot}.MMXU1.PhV.phsA.cVal '
        f'{prot}.MMXU1.A.phsA.cVal"/>'
        "</Thresholds>")
    return files


def write_bundle(directory: str, files: dict[str, str]) -> list[str]:
    os.makedirs(directory, exist_ok=True)
    written = []
    for name in sorted(files):
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(files[name])
        written.append(path)
    return written
