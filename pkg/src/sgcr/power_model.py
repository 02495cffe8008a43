"""Bus/branch power network and AC power-flow solver.

The network is extracted from a merged substation description: every
connectivity node becomes a bus, generators and loads attach to the bus
of their terminal, breakers and disconnectors become switches between
two buses, cable/line equipment becomes an impedance branch, and
two-winding transformers couple their winding buses.  Ratings that the
substation description cannot carry (power setpoints, switch status,
cable length and type) come from the accompanying parameter document.

Solving is full Newton-Raphson in polar form on the per-unit system,
one run per energized island.  Closed switches and zero-impedance
branches are fused into supernodes beforehand, so switching changes
topology without inventing tiny impedances.
"""

from __future__ import annotations

import cmath
import copy
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingParameter, NoSlack, StepOutOfRange, UnknownStdType
from .scl.documents import (
    CE_BREAKER,
    CE_DISCONNECTOR,
    CE_GENERATOR,
    CE_LINE_TYPES,
    CE_LOAD,
    SclDocument,
)
from .scl.supplements import ComponentParams, SupplementDoc

TOLERANCE = 1e-8
MAX_ITERATIONS = 20

# Catalog impedances for common cable/line types, ohm per km.  These are
# configuration defaults; callers may extend or override the table.
CABLE_TABLE: dict[str, tuple[float, float]] = {
    "NA2XS2Y 1x240": (0.122, 0.112),
    "NA2XS2Y 1x95": (0.313, 0.123),
    "N2XS(FL)2Y 1x120": (0.153, 0.166),
    "NAYY 4x50": (0.642, 0.083),
}


def load_cable_table(path: str) -> dict[str, tuple[float, float]]:
    """Read a JSON override table {std_type: {r_ohm_per_km, x_ohm_per_km}}."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    table = {}
    for name, entry in raw.items():
        table[name] = (float(entry["r_ohm_per_km"]), float(entry["x_ohm_per_km"]))
    return table


@dataclass
class Bus:
    id: int
    name: str
    nominal_kv: float
    vm_pu: float = 1.0
    va_deg: float = 0.0


@dataclass
class Generator:
    name: str
    bus: int
    p_mw: float = 0.0
    vm_pu: float = 1.0
    is_slack: bool = False
    p_mw_rated: float = 0.0
    data_sequence: list[float] | None = None


@dataclass
class Load:
    name: str
    bus: int
    p_mw: float
    q_mvar: float
    p_mw_rated: float = 0.0
    q_mvar_rated: float = 0.0
    data_sequence: list[float] | None = None


@dataclass
class Line:
    name: str
    from_bus: int
    to_bus: int
    length_km: float
    r_ohm_per_km: float
    x_ohm_per_km: float
    in_service: bool = True


@dataclass
class Transformer:
    name: str
    hv_bus: int
    lv_bus: int
    sn_mva: float
    vk_percent: float
    in_service: bool = True


@dataclass
class Switch:
    id: str
    bus: int
    element_ref: str
    closed: bool
    kind: str  # CBR or DIS
    data_sequence: list[float] | None = None

    @property
    def other_bus(self) -> int:
        return int(self.element_ref)


@dataclass
class PowerNetwork:
    buses: list[Bus] = field(default_factory=list)
    generators: list[Generator] = field(default_factory=list)
    loads: list[Load] = field(default_factory=list)
    lines: list[Line] = field(default_factory=list)
    transformers: list[Transformer] = field(default_factory=list)
    switches: list[Switch] = field(default_factory=list)
    n_steps: int = 1
    base_mva: float = 100.0
    node_bus: dict[str, int] = field(default_factory=dict)

    def bus(self, bus_id: int) -> Bus:
        return self.buses[bus_id]

    def find_switch(self, switch_id: str) -> Switch | None:
        for sw in self.switches:
            if sw.id == switch_id:
                return sw
        return None


@dataclass
class BusState:
    vm_pu: float
    va_deg: float


@dataclass
class BranchFlow:
    name: str
    kind: str  # "line" or "transformer"
    from_bus: int
    to_bus: int
    p_from_mw: float
    q_from_mvar: float
    p_to_mw: float
    q_to_mvar: float
    i_from_ka: float
    i_to_ka: float

    @property
    def i_ka(self) -> float:
        return self.i_from_ka


@dataclass
class InjectionResult:
    name: str
    bus: int
    p_mw: float
    q_mvar: float


@dataclass
class FlowSolution:
    buses: dict[int, BusState] = field(default_factory=dict)
    branches: list[BranchFlow] = field(default_factory=list)
    switches: dict[str, bool] = field(default_factory=dict)
    generators: list[InjectionResult] = field(default_factory=list)
    loads: list[InjectionResult] = field(default_factory=list)
    islands: dict[int, int] = field(default_factory=dict)
    energized: dict[int, bool] = field(default_factory=dict)
    converged: bool = True
    iterations: int = 0
    residual: float = 0.0

    def as_dict(self) -> dict:
        return {
            "buses": {str(i): [s.vm_pu, s.va_deg] for i, s in sorted(self.buses.items())},
            "branches": [
                [b.name, b.kind, b.from_bus, b.to_bus, b.p_from_mw, b.q_from_mvar,
                 b.p_to_mw, b.q_to_mvar, b.i_from_ka, b.i_to_ka]
                for b in self.branches
            ],
            "switches": dict(sorted(self.switches.items())),
            "generators": [[g.name, g.bus, g.p_mw, g.q_mvar] for g in self.generators],
            "loads": [[l.name, l.bus, l.p_mw, l.q_mvar] for l in self.loads],
            "islands": {str(k): v for k, v in sorted(self.islands.items())},
            "energized": {str(k): v for k, v in sorted(self.energized.items())},
            "converged": self.converged,
            "iterations": self.iterations,
            "residual": self.residual,
        }


# --- network construction --------------------------------------------------------


def _vl_kv_index(doc: SclDocument) -> dict[str, float]:
    kv = {}
    for proc in doc.processes:
        for vl in proc.voltage_levels:
            kv[vl.name] = vl.nominal_kv
            kv[f"{proc.name}/{vl.name}"] = vl.nominal_kv
    return kv


def _node_kv(node: str, terminal_vl: str | None, kv_index: dict[str, float]) -> float | None:
    parts = node.split("/")
    if len(parts) >= 2:
        key = f"{parts[0]}/{parts[1]}"
        if key in kv_index:
            return kv_index[key]
        if parts[1] in kv_index:
            return kv_index[parts[1]]
    if terminal_vl and terminal_vl in kv_index:
        return kv_index[terminal_vl]
    return None


def _require_param(comp: ComponentParams | None, attr: str, name: str, what: str):
    value = getattr(comp, attr) if comp is not None else None
    if value is None:
        raise MissingParameter(f"{what} {name!r} has no {attr!r} parameter")
    return value


def build_power_network(merged_ssd: SclDocument, params: SupplementDoc,
                        cable_table: dict[str, tuple[float, float]] | None = None,
                        ) -> PowerNetwork:
    """Extract the bus/branch model from a merged substation description.

    Raises MissingParameter when a component lacks a required rating and
    UnknownStdType when a cable type is absent from the catalog.
    """
    table = dict(CABLE_TABLE)
    if cable_table:
        table.update(cable_table)
    kv_index = _vl_kv_index(merged_ssd)
    net = PowerNetwork(base_mva=params.base_mva)
    n = params.timestep_count()
    net.n_steps = n if n is not None else 1

    def bus_of(node: str, terminal_vl: str | None, fallback_kv: float) -> int:
        if node in net.node_bus:
            return net.node_bus[node]
        kv = _node_kv(node, terminal_vl, kv_index)
        bus = Bus(id=len(net.buses), name=node,
                  nominal_kv=kv if kv is not None else fallback_kv)
        net.buses.append(bus)
        net.node_bus[node] = bus.id
        return bus.id

    for proc in merged_ssd.processes:
        for vl in proc.voltage_levels:
            for bay in vl.bays:
                for eq in bay.equipment:
                    comp = params.find_component(eq.name)
                    term_buses = [
                        bus_of(t.connectivity_node, t.voltage_level_name, vl.nominal_kv)
                        for t in eq.terminals
                    ]
                    if eq.ce_type == CE_GENERATOR:
                        is_slack = bool(comp.is_slack) if comp and comp.is_slack is not None else False
                        vm = comp.vm_pu if comp and comp.vm_pu is not None else None
                        if vm is None:
                            vm = _require_param(comp, "vm_pu", eq.name, "generator")
                        p = comp.p_mw if comp and comp.p_mw is not None else None
                        if p is None and not is_slack:
                            p = _require_param(comp, "p_mw", eq.name, "generator")
                        net.generators.append(Generator(
                            name=eq.name, bus=term_buses[0], p_mw=p or 0.0,
                            vm_pu=vm, is_slack=is_slack, p_mw_rated=p or 0.0,
                            data_sequence=comp.data_sequence if comp else None))
                    elif eq.ce_type == CE_LOAD:
                        p = _require_param(comp, "p_mw", eq.name, "load")
                        q = _require_param(comp, "q_mvar", eq.name, "load")
                        net.loads.append(Load(
                            name=eq.name, bus=term_buses[0], p_mw=p, q_mvar=q,
                            p_mw_rated=p, q_mvar_rated=q,
                            data_sequence=comp.data_sequence if comp else None))
                    elif eq.ce_type in (CE_BREAKER, CE_DISCONNECTOR):
                        closed = _require_param(comp, "closed", eq.name, "switch")
                        net.switches.append(Switch(
                            id=eq.name, bus=term_buses[0],
                            element_ref=str(term_buses[1]), closed=bool(closed),
                            kind=eq.ce_type,
                            data_sequence=comp.data_sequence if comp else None))
                    elif eq.ce_type in CE_LINE_TYPES:
                        length = _require_param(comp, "length_km", eq.name, "line")
                        std_type = _require_param(comp, "std_type", eq.name, "line")
                        if std_type not in table:
                            raise UnknownStdType(
                                f"line {eq.name!r} uses unknown std_type {std_type!r}")
                        r_km, x_km = table[std_type]
                        net.lines.append(Line(
                            name=eq.name, from_bus=term_buses[0], to_bus=term_buses[1],
                            length_km=length, r_ohm_per_km=r_km, x_ohm_per_km=x_km))
                for tr in bay.transformers:
                    comp = params.find_component(tr.name)
                    sn = _require_param(comp, "sn_mva", tr.name, "transformer")
                    vk = _require_param(comp, "vk_percent", tr.name, "transformer")
                    w_buses = [
                        bus_of(w.terminal.connectivity_node,
                               w.terminal.voltage_level_name, vl.nominal_kv)
                        for w in tr.windings
                    ]
                    kv0 = net.buses[w_buses[0]].nominal_kv
                    kv1 = net.buses[w_buses[1]].nominal_kv
                    hv, lv = (w_buses[0], w_buses[1]) if kv0 >= kv1 else (w_buses[1], w_buses[0])
                    net.transformers.append(Transformer(
                        name=tr.name, hv_bus=hv, lv_bus=lv,
                        sn_mva=sn, vk_percent=vk))
    return net


# --- topology ---------------------------------------------------------------------


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _branch_edges(net: PowerNetwork) -> list[tuple[int, int]]:
    edges = []
    for line in net.lines:
        if line.in_service:
            edges.append((line.from_bus, line.to_bus))
    for tr in net.transformers:
        if tr.in_service:
            edges.append((tr.hv_bus, tr.lv_bus))
    return edges


def detect_islands(net: PowerNetwork) -> dict[int, int]:
    """Connected components over in-service branches and closed switches.

    Returns bus id → island id, where the island id is the smallest bus
    id it contains.
    """
    uf = _UnionFind(len(net.buses))
    for a, b in _branch_edges(net):
        uf.union(a, b)
    for sw in net.switches:
        if sw.closed:
            uf.union(sw.bus, sw.other_bus)
    return {bus.id: uf.find(bus.id) for bus in net.buses}


def energized_islands(net: PowerNetwork, islands: dict[int, int] | None = None) -> set[int]:
    islands = islands if islands is not None else detect_islands(net)
    return {islands[g.bus] for g in net.generators}


# --- solver -----------------------------------------------------------------------


def _fuse(net: PowerNetwork) -> list[int]:
    """Map each bus to its supernode (zero-impedance groups collapsed)."""
    uf = _UnionFind(len(net.buses))
    for sw in net.switches:
        if sw.closed:
            uf.union(sw.bus, sw.other_bus)
    for line in net.lines:
        if line.in_service and line.r_ohm_per_km == 0 and line.x_ohm_per_km == 0:
            uf.union(line.from_bus, line.to_bus)
    return [uf.find(b.id) for b in net.buses]


def _line_z_pu(net: PowerNetwork, line: Line) -> complex:
    kv = net.buses[line.from_bus].nominal_kv
    z_base = kv * kv / net.base_mva
    return complex(line.r_ohm_per_km, line.x_ohm_per_km) * line.length_km / z_base


def _transformer_z_pu(net: PowerNetwork, tr: Transformer) -> complex:
    return complex(0.0, tr.vk_percent / 100.0 * net.base_mva / tr.sn_mva)


def _solve_island(nodes: list[int],
                  edges: list[tuple[int, int, complex]],
                  p_spec: dict[int, float], q_spec: dict[int, float],
                  slack: int, pv: dict[int, float],
                  ) -> tuple[dict[int, complex], int, float, bool]:
    """Newton-Raphson on one island of supernodes; returns voltages."""
    index = {node: i for i, node in enumerate(nodes)}
    n = len(nodes)
    ybus = np.zeros((n, n), dtype=complex)
    for a, b, z in edges:
        y = 1.0 / z
        ia, ib = index[a], index[b]
        ybus[ia, ia] += y
        ybus[ib, ib] += y
        ybus[ia, ib] -= y
        ybus[ib, ia] -= y

    vm = np.ones(n)
    va = np.zeros(n)
    s_spec = np.array([complex(p_spec.get(node, 0.0), q_spec.get(node, 0.0))
                       for node in nodes])
    slack_i = index[slack]
    pv_i = sorted(index[node] for node in pv if node != slack)
    for node, setpoint in pv.items():
        vm[index[node]] = setpoint
    pq_i = sorted(set(range(n)) - {slack_i} - set(pv_i))
    pvpq = pv_i + pq_i

    iterations = 0
    residual = math.inf
    for iterations in range(1, MAX_ITERATIONS + 1):
        v = vm * np.exp(1j * va)
        ibus = ybus @ v
        mismatch = v * np.conj(ibus) - s_spec
        f = np.concatenate([mismatch[pvpq].real, mismatch[pq_i].imag])
        residual = float(np.max(np.abs(f))) if f.size else 0.0
        if residual < TOLERANCE:
            return ({node: v[index[node]] for node in nodes}, iterations - 1,
                    residual, True)
        diag_v = np.diag(v)
        diag_i = np.diag(ibus)
        diag_vnorm = np.diag(v / np.abs(v))
        ds_dva = 1j * diag_v @ np.conj(diag_i - ybus @ diag_v)
        ds_dvm = diag_v @ np.conj(ybus @ diag_vnorm) + np.conj(diag_i) @ diag_vnorm
        j11 = ds_dva[np.ix_(pvpq, pvpq)].real
        j12 = ds_dvm[np.ix_(pvpq, pq_i)].real
        j21 = ds_dva[np.ix_(pq_i, pvpq)].imag
        j22 = ds_dvm[np.ix_(pq_i, pq_i)].imag
        jac = np.block([[j11, j12], [j21, j22]])
        try:
            dx = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            break
        va[pvpq] -= dx[: len(pvpq)]
        vm[pq_i] -= dx[len(pvpq):]
    v = vm * np.exp(1j * va)
    return {node: v[index[node]] for node in nodes}, iterations, residual, False


def solve_power_flow(net: PowerNetwork) -> FlowSolution:
    """AC solution per energized island; de-energized buses read 0 pu.

    Raises NoSlack when the network has buses but no island contains a
    generator to anchor a solution.
    """
    sol = FlowSolution()
    islands = detect_islands(net)
    sol.islands = islands
    live = energized_islands(net, islands)
    sol.energized = {isl: isl in live for isl in sorted(set(islands.values()))}
    sol.switches = {sw.id: sw.closed for sw in net.switches}
    if net.buses and not live:
        raise NoSlack("no energized island: every island lacks a generator")

    rep = _fuse(net)
    base = net.base_mva

    # Specified injections per supernode, in per-unit.
    p_spec: dict[int, float] = {}
    q_spec: dict[int, float] = {}
    for load in net.loads:
        node = rep[load.bus]
        p_spec[node] = p_spec.get(node, 0.0) - load.p_mw / base
        q_spec[node] = q_spec.get(node, 0.0) - load.q_mvar / base
    pv_setpoints: dict[int, float] = {}
    slack_by_island: dict[int, tuple[int, Generator]] = {}
    for gi, gen in enumerate(net.generators):
        isl = islands[gen.bus]
        node = rep[gen.bus]
        current = slack_by_island.get(isl)
        better = current is None or (gen.is_slack and not current[1].is_slack)
        if better:
            slack_by_island[isl] = (node, gen)
        pv_setpoints.setdefault(node, gen.vm_pu)

    for gen in net.generators:
        node = rep[gen.bus]
        slack_node, slack_gen = slack_by_island[islands[gen.bus]]
        if gen is not slack_gen:
            p_spec[node] = p_spec.get(node, 0.0) + gen.p_mw / base

    # Branch edges between distinct supernodes, grouped into islands.
    island_edges: dict[int, list[tuple[int, int, complex]]] = {}
    branch_meta: list[tuple[str, str, int, int, complex]] = []
    for line in net.lines:
        if not line.in_service:
            continue
        z = _line_z_pu(net, line)
        branch_meta.append((line.name, "line", line.from_bus, line.to_bus, z))
    for tr in net.transformers:
        if not tr.in_service:
            continue
        branch_meta.append((tr.name, "transformer", tr.hv_bus, tr.lv_bus,
                            _transformer_z_pu(net, tr)))
    for _name, _kind, fb, tb, z in branch_meta:
        a, b = rep[fb], rep[tb]
        if a == b or z == 0:
            continue
        island_edges.setdefault(islands[fb], []).append((a, b, z))

    # Solve each energized island over its supernodes.
    voltages: dict[int, complex] = {}
    total_iterations = 0
    worst_residual = 0.0
    converged = True
    for isl in sorted(live):
        nodes = sorted({rep[b] for b, i in islands.items() if i == isl})
        slack_node, slack_gen = slack_by_island[isl]
        pv = {node: pv_setpoints[node] for node in nodes if node in pv_setpoints}
        pv[slack_node] = slack_gen.vm_pu
        members = set(nodes)
        v, iters, residual, ok = _solve_island(
            nodes, island_edges.get(isl, []),
            {k: val for k, val in p_spec.items() if k in members},
            {k: val for k, val in q_spec.items() if k in members},
            slack_node, pv)
        voltages.update(v)
        total_iterations = max(total_iterations, iters)
        worst_residual = max(worst_residual, residual)
        converged = converged and ok

    sol.converged = converged
    sol.iterations = total_iterations
    sol.residual = worst_residual

    for bus in net.buses:
        node = rep[bus.id]
        if islands[bus.id] in live and node in voltages:
            v = voltages[node]
            sol.buses[bus.id] = BusState(vm_pu=abs(v),
                                         va_deg=math.degrees(cmath.phase(v)))
        else:
            sol.buses[bus.id] = BusState(vm_pu=0.0, va_deg=0.0)

    # Branch flows from the recovered voltages.
    for name, kind, fb, tb, z in branch_meta:
        a, b = rep[fb], rep[tb]
        vf = voltages.get(a)
        vt = voltages.get(b)
        if vf is None or vt is None or a == b:
            sol.branches.append(BranchFlow(name, kind, fb, tb, 0, 0, 0, 0, 0, 0))
            continue
        i_from = (vf - vt) / z
        s_from = vf * np.conj(i_from) * base
        s_to = vt * np.conj(-i_from) * base
        kv_f = net.buses[fb].nominal_kv
        kv_t = net.buses[tb].nominal_kv
        i_base_f = base / (math.sqrt(3.0) * kv_f) if kv_f else 0.0
        i_base_t = base / (math.sqrt(3.0) * kv_t) if kv_t else 0.0
        sol.branches.append(BranchFlow(
            name, kind, fb, tb,
            p_from_mw=float(s_from.real), q_from_mvar=float(s_from.imag),
            p_to_mw=float(s_to.real), q_to_mvar=float(s_to.imag),
            i_from_ka=float(abs(i_from)) * i_base_f,
            i_to_ka=float(abs(i_from)) * i_base_t))

    # Attribute computed injections back to machines.
    load_p: dict[int, float] = {}
    load_q: dict[int, float] = {}
    for load in net.loads:
        node = rep[load.bus]
        if islands[load.bus] in live:
            sol.loads.append(InjectionResult(load.name, load.bus, load.p_mw, load.q_mvar))
            load_p[node] = load_p.get(node, 0.0) + load.p_mw
            load_q[node] = load_q.get(node, 0.0) + load.q_mvar
        else:
            sol.loads.append(InjectionResult(load.name, load.bus, 0.0, 0.0))

    injections: dict[int, complex] = {}
    for node in voltages:
        injections[node] = 0j
    for name, kind, fb, tb, z in branch_meta:
        a, b = rep[fb], rep[tb]
        if a == b or a not in voltages:
            continue
        i_from = (voltages[a] - voltages[b]) / z
        injections[a] += voltages[a] * np.conj(i_from) * base
        injections[b] += voltages[b] * np.conj(-i_from) * base

    gen_q_assigned: set[int] = set()
    for gen in net.generators:
        isl = islands[gen.bus]
        if isl not in live:
            sol.generators.append(InjectionResult(gen.name, gen.bus, 0.0, 0.0))
            continue
        node = rep[gen.bus]
        slack_node, slack_gen = slack_by_island[isl]
        inj = injections.get(node, 0j)
        if gen is slack_gen:
            others = sum(g.p_mw for g in net.generators
                         if g is not gen and rep[g.bus] == node)
            p = float(inj.real) + load_p.get(node, 0.0) - others
        else:
            p = gen.p_mw
        if node not in gen_q_assigned:
            q = float(inj.imag) + load_q.get(node, 0.0)
            gen_q_assigned.add(node)
        else:
            q = 0.0
        sol.generators.append(InjectionResult(gen.name, gen.bus, p, q))
    return sol


# --- timestep loop ------------------------------------------------------------------


def apply_timestep(net: PowerNetwork, step: int,
                   switch_status: dict[str, bool] | None = None) -> PowerNetwork:
    """Return a copy of the network configured for one timestep.

    Loads and non-slack generation scale by their data sequence; switch
    statuses supplied by the caller (typically read back from the shared
    store, where trips and remote commands land) override whatever the
    parameter document said.
    """
    if step < 0 or step >= net.n_steps:
        raise StepOutOfRange(f"step {step} outside 0..{net.n_steps - 1}")
    out = copy.deepcopy(net)
    for load in out.loads:
        if load.data_sequence is not None:
            factor = load.data_sequence[step]
            load.p_mw = load.p_mw_rated * factor
            load.q_mvar = load.q_mvar_rated * factor
    for gen in out.generators:
        if gen.data_sequence is not None and not gen.is_slack:
            gen.p_mw = gen.p_mw_rated * gen.data_sequence[step]
    if switch_status:
        for sw in out.switches:
            if sw.id in switch_status:
                sw.closed = bool(switch_status[sw.id])
    return out
