"""Cyber topology derivation and frame delivery."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgcr.errors import (
    CableTriple,
    DanglingCable,
    SchemaViolation,
    UnknownScope,
    Unroutable,
)
from sgcr.merge import merge_scd
from sgcr.net_emu import (
    Frame,
    NetworkEmulator,
    build_cyber_topology,
    L2_MULTICAST,
    TCP_SEGMENT,
    UDP_MULTICAST,
)
from sgcr.scl import parse_scl

from genmodels import make_bundle

TWO_LAN_SCD = """<SCL><Header id="net"/>
  <IED name="IED1" type="IED"/>
  <IED name="IED2" type="IED"/>
  <IED name="IED3" type="IED"/>
  <IED name="SW1" type="SWITCH"/>
  <IED name="SW2" type="SWITCH"/>
  <Communication>
    <SubNetwork name="SN1">
      <ConnectedAP iedName="IED1" apName="AP1">
        <Address><P type="IP">10.0.1.11</P></Address>
        <PhysConn type="Connection"><P type="Port">1</P><P type="Cable">C1</P></PhysConn>
      </ConnectedAP>
      <ConnectedAP iedName="IED2" apName="AP1">
        <Address><P type="IP">10.0.1.12</P></Address>
        <PhysConn type="Connection"><P type="Port">1</P><P type="Cable">C2</P></PhysConn>
      </ConnectedAP>
      <ConnectedAP iedName="SW1" apName="AP1">
        <Address><P type="IP">10.0.1.1</P></Address>
        <PhysConn type="Connection"><P type="Port">1</P><P type="Cable">C1</P></PhysConn>
        <PhysConn type="Connection"><P type="Port">2</P><P type="Cable">C2</P></PhysConn>
        <PhysConn type="Connection"><P type="Port">24</P><P type="Cable">T1</P></PhysConn>
      </ConnectedAP>
    </SubNetwork>
    <SubNetwork name="SN2">
      <ConnectedAP iedName="IED3" apName="AP1">
        <Address><P type="IP">10.0.2.11</P></Address>
        <PhysConn type="Connection"><P type="Port">1</P><P type="Cable">C3</P></PhysConn>
      </ConnectedAP>
      <ConnectedAP iedName="SW2" apName="AP1">
        <Address><P type="IP">10.0.2.1</P></Address>
        <PhysConn type="Connection"><P type="Port">1</P><P type="Cable">C3</P></PhysConn>
        <PhysConn type="Connection"><P type="Port">24</P><P type="Cable">T1</P></PhysConn>
      </ConnectedAP>
    </SubNetwork>
  </Communication></SCL>"""


def _topology():
    return build_cyber_topology(parse_scl(TWO_LAN_SCD, "SCD"))


def _emulator():
    return NetworkEmulator(_topology())


def test_matching_cables_become_links():
    topo = _topology()
    assert set(topo.nodes) == {"IED1", "IED2", "IED3", "SW1", "SW2"}
    c1 = [l for l in topo.links if l.cable == "C1"]
    assert len(c1) == 1
    assert {c1[0].a[0], c1[0].b[0]} == {"IED1", "SW1"}
    assert {c1[0].a[1], c1[0].b[1]} == {"1", "1"}
    trunk = [l for l in topo.links if l.cable == "T1"]
    assert {trunk[0].a[0], trunk[0].b[0]} == {"SW1", "SW2"}


def test_node_kinds_follow_device_type():
    topo = _topology()
    assert topo.nodes["SW1"].kind == "switch"
    assert topo.nodes["IED1"].kind == "ied"
    assert topo.nodes["IED1"].address.ip == "10.0.1.11"
    assert topo.nodes["IED1"].subnetworks == {"SN1"}
    assert topo.nodes["SW1"].subnetworks == {"SN1"}


def test_single_ended_cable_rejected():
    text = TWO_LAN_SCD.replace(
        '<P type="Port">1</P><P type="Cable">C1</P>',
        '<P type="Port">1</P><P type="Cable">Cx</P>', 1)
    with pytest.raises(DanglingCable):
        build_cyber_topology(parse_scl(text, "SCD"))


def test_cable_on_three_endpoints_rejected():
    text = TWO_LAN_SCD.replace(
        '<P type="Port">1</P><P type="Cable">C3</P>',
        '<P type="Port">1</P><P type="Cable">C2</P>', 1)
    with pytest.raises(CableTriple):
        build_cyber_topology(parse_scl(text, "SCD"))


def test_duplicate_address_in_subnetwork_rejected():
    text = TWO_LAN_SCD.replace("10.0.1.12", "10.0.1.11")
    with pytest.raises(SchemaViolation):
        build_cyber_topology(parse_scl(text, "SCD"))


def test_unicast_delivers_exactly_once():
    emu = _emulator()
    seen = []
    emu.register_handler("IED2", lambda f, t: seen.append((f, t)))
    frame = Frame(kind=TCP_SEGMENT, src="IED1", dst="10.0.1.12:10102",
                  payload=b"req")
    receivers = emu.send_frame(frame)
    assert receivers == ["IED2"]
    assert emu.pending() == 1
    emu.run_until(10.0)
    assert len(seen) == 1
    delivered, t = seen[0]
    assert delivered.payload == b"req"
    assert t == pytest.approx(0.2)  # two hops at the 0.1 ms default


def test_multicast_reaches_subscribers_not_sender():
    emu = _emulator()
    for name in ("IED1", "IED2", "IED3"):
        emu.subscribe(name, 0x1001)
    frame = Frame(kind=UDP_MULTICAST, src="IED1", dst="224.0.1.5",
                  payload=b"goose", app_id=0x1001)
    receivers = emu.send_frame(frame)
    assert receivers == ["IED2", "IED3"]


def test_l2_multicast_stays_inside_subnetwork():
    emu = _emulator()
    for name in ("IED2", "IED3"):
        emu.subscribe(name, 7)
    frame = Frame(kind=L2_MULTICAST, src="IED1", dst="01-0C-CD-01-00-07",
                  payload=b"goose", app_id=7)
    assert emu.send_frame(frame) == ["IED2"]


def test_unowned_address_unroutable():
    emu = _emulator()
    frame = Frame(kind=TCP_SEGMENT, src="IED1", dst="10.0.9.9", payload=b"x")
    with pytest.raises(Unroutable):
        emu.send_frame(frame)


def test_bad_multicast_group_unroutable():
    emu = _emulator()
    frame = Frame(kind=UDP_MULTICAST, src="IED1", dst="10.0.1.12",
                  payload=b"x", app_id=1)
    with pytest.raises(Unroutable):
        emu.send_frame(frame)


def test_trunk_tap_sees_crossing_frames_only():
    emu = _emulator()
    emu.subscribe("IED3", 0x1001)
    trunk = emu.attach_tap("T1")
    idle = emu.attach_tap("C2")
    crossing = Frame(kind=UDP_MULTICAST, src="IED1", dst="224.0.1.5",
                     payload=b"rgoose", app_id=0x1001)
    local = Frame(kind=TCP_SEGMENT, src="IED1", dst="10.0.1.1",
                  payload=b"mgmt")
    emu.send_frame(crossing)
    emu.send_frame(local)
    emu.run_until(10.0)
    assert [f.payload for _, f in trunk.frames] == [b"rgoose"]
    assert idle.frames == []


def test_two_taps_get_identical_copies():
    emu = _emulator()
    a = emu.attach_tap("C1")
    b = emu.attach_tap("C1")
    emu.send_frame(Frame(kind=TCP_SEGMENT, src="IED1", dst="10.0.1.1",
                         payload=b"ping"))
    emu.run_until(10.0)
    assert a.frames == b.frames
    assert len(a.frames) == 1


def test_unknown_tap_scope_rejected():
    emu = _emulator()
    with pytest.raises(UnknownScope):
        emu.attach_tap("nowhere")


def test_taps_do_not_perturb_delivery():
    def run(with_taps: bool):
        emu = _emulator()
        for name in ("IED2", "IED3"):
            emu.subscribe(name, 0x1001)
        if with_taps:
            emu.attach_tap("T1")
            emu.attach_tap("SW1")
            emu.attach_tap("C1")
        out = []
        out.append(emu.send_frame(Frame(
            kind=UDP_MULTICAST, src="IED1", dst="224.0.1.5",
            payload=b"a", app_id=0x1001)))
        out.append(emu.send_frame(Frame(
            kind=TCP_SEGMENT, src="IED3", dst="10.0.1.11", payload=b"b")))
        emu.run_until(10.0)
        out.append([(t, n, f.payload) for t, n, f in emu.delivery_log])
        return out

    assert run(False) == run(True)


def test_multicast_crosses_trunk_once_per_frame():
    emu = _emulator()
    emu.subscribe("IED2", 5)
    emu.subscribe("IED3", 5)
    trunk = emu.attach_tap("T1")
    emu.send_frame(Frame(kind=UDP_MULTICAST, src="IED1", dst="224.0.0.9",
                         payload=b"m", app_id=5))
    emu.run_until(10.0)
    assert len(trunk.frames) == 1


def test_injected_spoof_reaches_subscriber():
    emu = _emulator()
    emu.subscribe("IED3", 0x1001)
    emu.add_attacker("EVIL", attach_to="SW1", ip="10.0.1.66")
    seen = []
    emu.register_handler("IED3", lambda f, t: seen.append(f))
    spoof = Frame(kind=UDP_MULTICAST, src="IED1", dst="224.0.1.5",
                  payload=b"forged", app_id=0x1001)
    receivers = emu.inject_frame("EVIL", spoof)
    emu.run_until(10.0)
    assert receivers == ["IED3"]
    assert len(seen) == 1
    assert seen[0].src == "IED1"  # the spoofed identity survives
    assert seen[0].injected_by is None  # receivers cannot tell
    assert emu.injection_log[0][2].injected_by == "EVIL"


def test_injection_from_detached_node_unroutable():
    emu = _emulator()
    emu.add_attacker("EVIL", attach_to="SW2")
    emu.drop_link("atk:EVIL")
    with pytest.raises(Unroutable):
        emu.inject_frame("EVIL", Frame(kind=UDP_MULTICAST, src="EVIL",
                                       dst="224.0.0.1", payload=b"x"))


def test_injected_request_gets_reply_to_attacker():
    emu = _emulator()
    emu.add_attacker("EVIL", attach_to="SW1", ip="10.0.1.66")
    replies = []

    def server(frame, t):
        emu.send_frame(Frame(kind=TCP_SEGMENT, src="IED2",
                             dst=frame.src, payload=b"echo:" + frame.payload))

    emu.register_handler("IED2", server)
    emu.register_handler("EVIL", lambda f, t: replies.append(f))
    emu.inject_frame("EVIL", Frame(kind=TCP_SEGMENT, src="EVIL",
                                   dst="10.0.1.12", payload=b"probe"))
    emu.run_until(10.0)
    assert [f.payload for f in replies] == [b"echo:probe"]


def test_same_path_preserves_send_order():
    emu = _emulator()
    order = []
    emu.register_handler("IED2", lambda f, t: order.append(f.payload))
    for i in range(5):
        emu.send_frame(Frame(kind=TCP_SEGMENT, src="IED1", dst="10.0.1.12",
                             payload=b"%d" % i))
    emu.run_until(10.0)
    assert order == [b"0", b"1", b"2", b"3", b"4"]


def test_latency_accumulates_per_hop():
    topo = _topology()
    for link in topo.links:
        link.latency_ms = 0.5
    emu = NetworkEmulator(topo)
    times = []
    emu.register_handler("IED3", lambda f, t: times.append(t))
    emu.send_frame(Frame(kind=TCP_SEGMENT, src="IED1", dst="10.0.2.11",
                         payload=b"far"), at_ms=2.0)
    emu.run_until(10.0)
    # IED1 -> SW1 -> SW2 -> IED3 is three links
    assert times == [pytest.approx(3.5)]


def test_dropped_link_breaks_route():
    emu = _emulator()
    emu.drop_link("T1")
    with pytest.raises(Unroutable):
        emu.send_frame(Frame(kind=TCP_SEGMENT, src="IED1", dst="10.0.2.11",
                             payload=b"x"))


def test_empty_payload_rejected():
    emu = _emulator()
    with pytest.raises(Unroutable):
        emu.send_frame(Frame(kind=TCP_SEGMENT, src="IED1", dst="10.0.1.12",
                             payload=b""))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_topology_is_a_pure_function_of_the_document(seed):
    bundle = make_bundle(seed)
    merged = merge_scd([parse_scl(bundle.scd_text, "SCD")],
                       [parse_scl(t, "ICD") for t in bundle.icd_texts])
    a = build_cyber_topology(merged)
    b = build_cyber_topology(merged)
    assert sorted(a.nodes) == sorted(b.nodes)
    assert [(l.a, l.b, l.cable) for l in a.links] == \
        [(l.a, l.b, l.cable) for l in b.links]
    for name, node in a.nodes.items():
        twin = b.nodes[name]
        assert (node.kind, node.address, node.subnetworks) == \
            (twin.kind, twin.address, twin.subnetworks)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.data())
def test_unicast_conservation(seed, data):
    bundle = make_bundle(seed)
    merged = merge_scd([parse_scl(bundle.scd_text, "SCD")],
                       [parse_scl(t, "ICD") for t in bundle.icd_texts])
    topo = build_cyber_topology(merged)
    hosts = sorted(n for n, node in topo.nodes.items()
                   if node.kind != "switch" and node.address.ip)
    if len(hosts) < 2:
        return
    src = data.draw(st.sampled_from(hosts))
    dst = data.draw(st.sampled_from([h for h in hosts if h != src]))
    emu = NetworkEmulator(topo)
    inbox = {name: [] for name in topo.nodes}
    for name in topo.nodes:
        emu.register_handler(name, lambda f, t, n=name: inbox[n].append(f))
    try:
        receivers = emu.send_frame(Frame(
            kind=TCP_SEGMENT, src=src, dst=topo.nodes[dst].address.ip,
            payload=b"p"))
    except Unroutable:
        return  # disjoint subnetworks with no trunk between them
    emu.run_until(1e9)
    assert receivers == [dst]
    for name, frames in inbox.items():
        assert len(frames) == (1 if name == dst else 0)
