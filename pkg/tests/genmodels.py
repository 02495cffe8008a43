"""Random model-bundle builders shared by unit and acceptance tests.

Built on random.Random so the same generator serves hypothesis strategies
and plain seeded loops.  Documents are emitted as XML text, the way real
inputs arrive, together with the counts the generator knows to be true.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

_EQ_TYPES = ("CBR", "DIS", "GEN", "IFL", "CAB")
_LN_CLASSES = ("MMXU", "XCBR", "PTOC", "PTOV", "PTUV", "CSWI")


@dataclass
class BundleStats:
    processes: int = 0
    bays: int = 0
    equipment: int = 0
    ieds: int = 0
    subnetworks: int = 0
    connected_aps: int = 0


@dataclass
class RandomBundle:
    ssd_texts: list[str] = field(default_factory=list)
    sed_texts: list[str] = field(default_factory=list)
    icd_texts: list[str] = field(default_factory=list)
    scd_text: str | None = None
    stats: BundleStats = field(default_factory=BundleStats)
    ied_names: list[str] = field(default_factory=list)


def _equipment_xml(rng: random.Random, bay_path: str, idx: int) -> tuple[str, int]:
    ce_type = rng.choice(_EQ_TYPES)
    name = f"E{idx}_{ce_type}"
    n_terms = 2 if ce_type in ("CBR", "DIS", "CAB") else 1
    terms = "".join(
        f'<Terminal connectivityNode="{bay_path}/N{idx}_{t}"/>' for t in range(n_terms)
    )
    nodes = "".join(
        f'<ConnectivityNode name="N{idx}_{t}" pathName="{bay_path}/N{idx}_{t}"/>'
        for t in range(n_terms)
    )
    return f'<ConductingEquipment name="{name}" type="{ce_type}">{terms}</ConductingEquipment>{nodes}', 1


def make_ssd(rng: random.Random, doc_idx: int, stats: BundleStats) -> str:
    parts = ['<SCL><Header id="gen-ssd-%d"/>' % doc_idx]
    for p in range(rng.randint(1, 2)):
        pname = f"S{doc_idx}_{p}"
        stats.processes += 1
        parts.append(f'<Substation name="{pname}">')
        for v in range(rng.randint(1, 2)):
            kv = rng.choice((11, 33, 66))
            vname = f"{kv}kV_{v}"
            parts.append(f'<VoltageLevel name="{vname}" nomFreq="50" numPhases="3">'
                         f'<Voltage unit="V" multiplier="k">{kv}</Voltage>')
            for b in range(rng.randint(1, 3)):
                bname = f"Bay{b}"
                bay_path = f"{pname}/{vname}/{bname}"
                stats.bays += 1
                parts.append(f'<Bay name="{bname}">')
                for e in range(rng.randint(0, 4)):
                    xml, n = _equipment_xml(rng, bay_path, e)
                    stats.equipment += n
                    parts.append(xml)
                parts.append("</Bay>")
            parts.append("</VoltageLevel>")
        parts.append("</Substation>")
    parts.append("</SCL>")
    return "".join(parts)


def make_icd(rng: random.Random, name: str) -> str:
    lns = ['<LN0 lnClass="LLN0" inst="1"/>']
    for cls in rng.sample(_LN_CLASSES, rng.randint(1, 4)):
        lns.append(f'<LN lnClass="{cls}" inst="1"/>')
    body = "".join(lns)
    return (f'<SCL><Header id="gen-icd-{name}"/>'
            f'<IED name="{name}" type="IED">'
            f'<AccessPoint name="AP1"><Server><LDevice inst="LD0">{body}'
            f"</LDevice></Server></AccessPoint></IED></SCL>")


def make_scd(rng: random.Random, ied_names: list[str], stats: BundleStats,
             doc_idx: int = 0) -> str:
    parts = [f'<SCL><Header id="gen-scd-{doc_idx}"/><Communication>']
    cable_no = 0
    remaining = list(ied_names)
    sn_idx = 0
    while remaining:
        take = min(len(remaining), rng.randint(1, 4))
        members, remaining = remaining[:take], remaining[take:]
        sw = f"SW{doc_idx}_{sn_idx}"
        stats.subnetworks += 1
        parts.append(f'<SubNetwork name="SN{doc_idx}_{sn_idx}">')
        aps = []
        sw_conns = []
        for j, ied in enumerate(members):
            cable = f"C{doc_idx}_{cable_no}"
            cable_no += 1
            host = 10 + len(aps)
            aps.append(
                f'<ConnectedAP iedName="{ied}" apName="AP1">'
                f'<Address><P type="IP">10.0.{sn_idx}.{host}</P>'
                f'<P type="IP-SUBNET">255.255.255.0</P></Address>'
                f'<PhysConn type="Connection"><P type="Port">1</P>'
                f'<P type="Cable">{cable}</P></PhysConn></ConnectedAP>')
            sw_conns.append(
                f'<PhysConn type="Connection"><P type="Port">{j + 1}</P>'
                f'<P type="Cable">{cable}</P></PhysConn>')
            stats.connected_aps += 1
        aps.append(
            f'<ConnectedAP iedName="{sw}" apName="AP1">'
            f'<Address><P type="IP">10.0.{sn_idx}.1</P></Address>'
            + "".join(sw_conns) + "</ConnectedAP>")
        stats.connected_aps += 1
        parts.extend(aps)
        parts.append("</SubNetwork>")
        sn_idx += 1
    parts.append("</Communication>")
    for sw_i in range(sn_idx):
        parts.append(f'<IED name="SW{doc_idx}_{sw_i}" type="SWITCH">'
                     f'<AccessPoint name="AP1"><Server><LDevice inst="LD0">'
                     f'<LN0 lnClass="LLN0" inst="1"/></LDevice></Server>'
                     f"</AccessPoint></IED>")
    parts.append("</SCL>")
    return "".join(parts)


def make_bundle(seed: int, n_ssd: int | None = None, n_icd: int | None = None) -> RandomBundle:
    """Build a self-consistent random bundle from one integer seed."""
    rng = random.Random(seed)
    bundle = RandomBundle()
    n_ssd = n_ssd if n_ssd is not None else rng.randint(1, 3)
    n_icd = n_icd if n_icd is not None else rng.randint(1, 5)
    for i in range(n_ssd):
        bundle.ssd_texts.append(make_ssd(rng, i, bundle.stats))
    for i in range(n_icd):
        name = f"IED{i}"
        bundle.ied_names.append(name)
        bundle.icd_texts.append(make_icd(rng, name))
        bundle.stats.ieds += 1
    bundle.scd_text = make_scd(rng, bundle.ied_names, bundle.stats)
    return bundle
