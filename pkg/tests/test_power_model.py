"""Power network extraction and AC power-flow solving.

The expected numbers here are produced by closed-form or test-local
recomputation, never by the solver under test.
"""

from __future__ import annotations

import cmath
import json
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgcr.errors import MissingParameter, NoSlack, StepOutOfRange, UnknownStdType
from sgcr.power_model import (
    Bus,
    Generator,
    Line,
    Load,
    PowerNetwork,
    Switch,
    Transformer,
    apply_timestep,
    build_power_network,
    detect_islands,
    solve_power_flow,
)
from sgcr.scl import parse_scl, parse_supplement

TWO_NODE_SSD = """<SCL><Header id="2bus"/>
<Substation name="S1">
  <VoltageLevel name="11kV" nomFreq="50" numPhases="3">
    <Voltage unit="V" multiplier="k">11</Voltage>
    <Bay name="BayG">
      <ConductingEquipment name="G1" type="GEN">
        <Terminal connectivityNode="S1/11kV/BayG/N1"/>
      </ConductingEquipment>
      <ConnectivityNode name="N1" pathName="S1/11kV/BayG/N1"/>
    </Bay>
    <Bay name="BayL">
      <ConductingEquipment name="L1" type="CAB">
        <Terminal connectivityNode="S1/11kV/BayG/N1"/>
        <Terminal connectivityNode="S1/11kV/BayL/N2"/>
      </ConductingEquipment>
      <ConductingEquipment name="Load0" type="IFL">
        <Terminal connectivityNode="S1/11kV/BayL/N2"/>
      </ConductingEquipment>
      <ConnectivityNode name="N2" pathName="S1/11kV/BayL/N2"/>
    </Bay>
  </VoltageLevel>
</Substation></SCL>"""

TWO_NODE_PARAMS = """<PowerParams base_mva="100">
  <Component component_ref="G1" vm_pu="1.0" is_slack="true"/>
  <Component component_ref="L1" length_km="2.0" std_type="NA2XS2Y 1x240"/>
  <Component component_ref="Load0" p_mw="1.0" q_mvar="0.2" data_sequence="1.0 1.1"/>
</PowerParams>"""


def _two_bus_net(p_mw: float = 50.0, q_mvar: float = 0.0,
                 x_pu: float = 0.1, r_pu: float = 0.0) -> PowerNetwork:
    # kv chosen so that z_base = kv^2 / base = 1 ohm: ohms read as pu.
    kv = 10.0
    net = PowerNetwork(base_mva=100.0)
    net.buses = [Bus(0, "N0", kv), Bus(1, "N1", kv)]
    net.generators = [Generator("G", bus=0, vm_pu=1.0, is_slack=True)]
    net.loads = [Load("L", bus=1, p_mw=p_mw, q_mvar=q_mvar,
                      p_mw_rated=p_mw, q_mvar_rated=q_mvar)]
    net.lines = [Line("LN", 0, 1, length_km=1.0,
                      r_ohm_per_km=r_pu, x_ohm_per_km=x_pu)]
    return net


def test_build_maps_components():
    doc = parse_scl(TWO_NODE_SSD, "SSD")
    params = parse_supplement(TWO_NODE_PARAMS, "PowerParams")
    net = build_power_network(doc, params)
    assert len(net.buses) == 2
    assert len(net.generators) == 1 and net.generators[0].is_slack
    assert len(net.loads) == 1 and net.loads[0].p_mw == 1.0
    assert len(net.lines) == 1
    assert net.lines[0].r_ohm_per_km == 0.122
    assert net.n_steps == 2


def test_missing_switch_status_is_an_error():
    ssd = TWO_NODE_SSD.replace('name="L1" type="CAB"', 'name="L1" type="CBR"')
    params = TWO_NODE_PARAMS.replace(
        '<Component component_ref="L1" length_km="2.0" std_type="NA2XS2Y 1x240"/>', "")
    with pytest.raises(MissingParameter):
        build_power_network(parse_scl(ssd, "SSD"),
                            parse_supplement(params, "PowerParams"))


def test_unknown_std_type():
    params = TWO_NODE_PARAMS.replace("NA2XS2Y 1x240", "unobtainium 1x999")
    with pytest.raises(UnknownStdType):
        build_power_network(parse_scl(TWO_NODE_SSD, "SSD"),
                            parse_supplement(params, "PowerParams"))


def test_two_bus_closed_form():
    """|V2| and angle from the quadratic of the lossless two-bus case.

    With slack 1.0 pu, series reactance x, load P+j0:
      V sin(t) = -P*x  and  V = cos(t)  =>  V^4 - V^2 + (P*x)^2 = 0.
    """
    p_pu, x_pu = 0.5, 0.1
    v2_sq = (1.0 + math.sqrt(1.0 - 4.0 * (p_pu * x_pu) ** 2)) / 2.0
    v2_oracle = math.sqrt(v2_sq)
    theta_oracle = math.degrees(0.5 * math.asin(-2.0 * p_pu * x_pu))

    sol = solve_power_flow(_two_bus_net(p_mw=100.0 * p_pu, x_pu=x_pu))
    assert sol.converged
    assert abs(sol.buses[1].vm_pu - v2_oracle) < 1e-8
    assert abs(sol.buses[1].va_deg - theta_oracle) < 1e-6
    assert abs(sol.buses[0].vm_pu - 1.0) < 1e-12


def test_no_load_fixed_point():
    net = _two_bus_net(p_mw=0.0)
    sol = solve_power_flow(net)
    assert sol.converged and sol.iterations <= 1
    for state in sol.buses.values():
        assert state.vm_pu == pytest.approx(1.0, abs=1e-12)
        assert state.va_deg == pytest.approx(0.0, abs=1e-12)
    assert all(abs(b.p_from_mw) < 1e-9 for b in sol.branches)


def test_open_line_deenergizes_island():
    net = _two_bus_net()
    net.lines[0].in_service = False
    sol = solve_power_flow(net)
    assert sol.converged
    assert sol.buses[1].vm_pu == 0.0
    assert sol.buses[0].vm_pu == pytest.approx(1.0)
    assert sol.loads[0].p_mw == 0.0


def test_no_energized_island_raises():
    net = _two_bus_net()
    net.generators = []
    with pytest.raises(NoSlack):
        solve_power_flow(net)


def _three_group_net(tie_closed: bool) -> PowerNetwork:
    net = PowerNetwork(base_mva=100.0)
    for i in range(6):
        net.buses.append(Bus(i, f"N{i}", 66.0))
    for g in range(3):
        a, b = 2 * g, 2 * g + 1
        net.generators.append(Generator(f"G{g}", bus=a, vm_pu=1.0, is_slack=g == 0))
        net.lines.append(Line(f"L{g}", a, b, 1.0, 0.1, 0.2))
        net.loads.append(Load(f"D{g}", bus=b, p_mw=5.0, q_mvar=1.0,
                              p_mw_rated=5.0, q_mvar_rated=1.0))
    net.switches = [
        Switch("TIE1", bus=1, element_ref="2", closed=tie_closed, kind="CBR"),
        Switch("TIE2", bus=3, element_ref="4", closed=tie_closed, kind="CBR"),
    ]
    return net


def test_detect_islands_tie_switches():
    both_open = detect_islands(_three_group_net(tie_closed=False))
    assert len(set(both_open.values())) == 3
    both_closed = detect_islands(_three_group_net(tie_closed=True))
    assert len(set(both_closed.values())) == 1


def test_switch_current_zero_when_open():
    sol = solve_power_flow(_three_group_net(tie_closed=False))
    assert sol.converged
    assert len([e for e in sol.energized.values() if e]) == 3


def _random_net(seed: int) -> PowerNetwork:
    rng = random.Random(seed)
    n = rng.randint(4, 10)
    net = PowerNetwork(base_mva=100.0)
    for i in range(n):
        net.buses.append(Bus(i, f"N{i}", 11.0))
    net.generators.append(Generator("G0", bus=0, vm_pu=1.0, is_slack=True))
    for i in range(1, n):
        parent = rng.randrange(i)
        net.lines.append(Line(f"L{i}", parent, i, rng.uniform(0.3, 2.0),
                              0.122, 0.112))
        if rng.random() < 0.7:
            p = rng.uniform(0.2, 6.0)
            net.loads.append(Load(f"D{i}", bus=i, p_mw=p, q_mvar=0.3 * p,
                                  p_mw_rated=p, q_mvar_rated=0.3 * p))
    if n >= 6:
        net.switches.append(Switch("SW0", bus=1, element_ref=str(n - 1),
                                   closed=rng.random() < 0.5, kind="CBR"))
    return net


def _nodal_residual_mw(net: PowerNetwork, sol) -> float:
    """Recompute worst nodal power balance from the returned voltages.

    Test-local oracle: groups buses joined by closed switches, assembles
    branch flows from raw impedances, and checks exported power against
    the requested injections at every non-slack group.
    """
    group = list(range(len(net.buses)))

    def find(a):
        while group[a] != a:
            group[a] = group[group[a]]
            a = group[a]
        return a

    for sw in net.switches:
        if sw.closed:
            ra, rb = find(sw.bus), find(sw.other_bus)
            if ra != rb:
                group[max(ra, rb)] = min(ra, rb)

    volts = {}
    for bus_id, state in sol.buses.items():
        volts[bus_id] = state.vm_pu * cmath.exp(1j * math.radians(state.va_deg))

    export: dict[int, complex] = {}
    for line in net.lines:
        if not line.in_service:
            continue
        a, b = find(line.from_bus), find(line.to_bus)
        if a == b:
            continue
        kv = net.buses[line.from_bus].nominal_kv
        z = complex(line.r_ohm_per_km, line.x_ohm_per_km) * line.length_km
        z /= kv * kv / net.base_mva
        vf, vt = volts[line.from_bus], volts[line.to_bus]
        if abs(vf) == 0 or abs(vt) == 0:
            continue
        i = (vf - vt) / z
        export[a] = export.get(a, 0j) + vf * i.conjugate()
        export[b] = export.get(b, 0j) - vt * i.conjugate()

    spec: dict[int, complex] = {}
    slack_groups = set()
    for gen in net.generators:
        g = find(gen.bus)
        if gen.is_slack or not slack_groups:
            slack_groups.add(g)
        else:
            spec[g] = spec.get(g, 0j) + gen.p_mw / net.base_mva
    for load in net.loads:
        g = find(load.bus)
        if abs(volts[load.bus]) > 0:
            spec[g] = spec.get(g, 0j) - complex(load.p_mw, load.q_mvar) / net.base_mva

    worst = 0.0
    groups = {find(b.id) for b in net.buses if abs(volts[b.id]) > 0}
    for g in groups:
        if g in slack_groups:
            continue
        diff = export.get(g, 0j) - spec.get(g, 0j)
        worst = max(worst, abs(diff.real), abs(diff.imag))
    return worst


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_random_networks_converge_and_balance(seed):
    net = _random_net(seed)
    sol = solve_power_flow(net)
    assert sol.converged
    assert sol.residual < 1e-8
    assert _nodal_residual_mw(net, sol) < 1e-8

    gen_p = sum(g.p_mw for g in sol.generators)
    load_p = sum(l.p_mw for l in sol.loads)
    loss_p = sum(b.p_from_mw + b.p_to_mw for b in sol.branches)
    assert abs(gen_p - load_p - loss_p) < 1e-6 * net.base_mva


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_opening_switches_never_energizes(seed):
    net = _random_net(seed)

    def energized_count(n):
        islands = detect_islands(n)
        live = {islands[g.bus] for g in n.generators}
        return sum(1 for b in n.buses if islands[b.id] in live)

    baseline = energized_count(net)
    for i, sw in enumerate(net.switches):
        if not sw.closed:
            continue
        trial = apply_timestep(net, 0, switch_status={sw.id: False})
        assert energized_count(trial) <= baseline


def test_transformer_couples_voltage_levels():
    net = PowerNetwork(base_mva=100.0)
    net.buses = [Bus(0, "HV", 66.0), Bus(1, "LV", 11.0)]
    net.generators = [Generator("G", bus=0, vm_pu=1.0, is_slack=True)]
    net.transformers = [Transformer("T1", hv_bus=0, lv_bus=1,
                                    sn_mva=25.0, vk_percent=10.0)]
    net.loads = [Load("D", bus=1, p_mw=10.0, q_mvar=2.0,
                      p_mw_rated=10.0, q_mvar_rated=2.0)]
    sol = solve_power_flow(net)
    assert sol.converged
    assert 0.9 < sol.buses[1].vm_pu < 1.0
    hv_flow = sol.branches[0]
    assert hv_flow.kind == "transformer"
    # pure-reactance model: active power passes through, reactive is consumed
    assert hv_flow.p_from_mw == pytest.approx(10.0, abs=1e-6)
    assert hv_flow.q_from_mvar > 2.0
    # x_pu = 10% on 25 MVA = 0.4 pu on 100 MVA; drop should match roughly Q*x
    assert sol.buses[1].vm_pu == pytest.approx(1 - 0.4 * 0.02 - 0.5 * (0.4 * 0.1) ** 2, abs=5e-3)


def test_transformer_orientation_from_document():
    ssd = """<SCL><Header id="t"/><Substation name="S1">
      <VoltageLevel name="66kV"><Voltage unit="V" multiplier="k">66</Voltage>
        <Bay name="B1">
          <ConductingEquipment name="G1" type="GEN">
            <Terminal connectivityNode="S1/66kV/B1/NH"/>
          </ConductingEquipment>
          <PowerTransformer name="T1">
            <TransformerWinding name="W2">
              <Terminal connectivityNode="S1/11kV/B2/NL" voltageLevelName="11kV"/>
            </TransformerWinding>
            <TransformerWinding name="W1">
              <Terminal connectivityNode="S1/66kV/B1/NH" voltageLevelName="66kV"/>
            </TransformerWinding>
          </PowerTransformer>
          <ConnectivityNode name="NH" pathName="S1/66kV/B1/NH"/>
        </Bay>
      </VoltageLevel>
      <VoltageLevel name="11kV"><Voltage unit="V" multiplier="k">11</Voltage>
        <Bay name="B2">
          <ConductingEquipment name="D1" type="IFL">
            <Terminal connectivityNode="S1/11kV/B2/NL"/>
          </ConductingEquipment>
          <ConnectivityNode name="NL" pathName="S1/11kV/B2/NL"/>
        </Bay>
      </VoltageLevel>
    </Substation></SCL>"""
    params = parse_supplement(
        '<PowerParams>'
        '<Component component_ref="G1" vm_pu="1.0" is_slack="true"/>'
        '<Component component_ref="T1" sn_mva="25" vk_percent="10"/>'
        '<Component component_ref="D1" p_mw="5" q_mvar="1"/>'
        '</PowerParams>', "PowerParams")
    net = build_power_network(parse_scl(ssd, "SSD"), params)
    tr = net.transformers[0]
    assert net.buses[tr.hv_bus].nominal_kv == 66.0
    assert net.buses[tr.lv_bus].nominal_kv == 11.0


def test_apply_timestep_scaling_and_override():
    doc = parse_scl(TWO_NODE_SSD, "SSD")
    params = parse_supplement(TWO_NODE_PARAMS, "PowerParams")
    net = build_power_network(doc, params)
    step0 = apply_timestep(net, 0)
    assert step0.loads[0].p_mw == pytest.approx(1.0)
    step1 = apply_timestep(net, 1)
    assert step1.loads[0].p_mw == pytest.approx(1.1)
    assert step1.loads[0].q_mvar == pytest.approx(0.22)
    with pytest.raises(StepOutOfRange):
        apply_timestep(net, 2)
    with pytest.raises(StepOutOfRange):
        apply_timestep(net, -1)


def test_store_status_overrides_parameters():
    net = _three_group_net(tie_closed=True)
    out = apply_timestep(net, 0, switch_status={"TIE1": False})
    assert out.find_switch("TIE1").closed is False
    assert out.find_switch("TIE2").closed is True
    assert net.find_switch("TIE1").closed is True  # original untouched


def test_solution_deterministic():
    a = solve_power_flow(_random_net(1234)).as_dict()
    b = solve_power_flow(_random_net(1234)).as_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
