"""Backward/forward sweep solver for the DistFlow branch-flow equations.

Each phase is an independent radial network.  The sweep alternates
leaf-to-root accumulation of branch flows (using the current squared-current
estimates) with root-to-leaf voltage updates, iterating to a fixed point.
Regulator and transformer edges are ideal ratio transformers: zero impedance,
v_child = ratio * v_parent, power passes through losslessly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import LINE, Circuit, PHASES
from .devices import DeviceState, regulator_ratio
from .errors import DimensionMismatch, SingularOperatingPoint

V2_COLLAPSE = 1e-4  # pu^2; below this the operating point is declared singular


@dataclass
class SolverConfig:
    tol: float = 1e-8  # max |v change| per iteration, pu
    max_iter: int = 100

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("need tol > 0 and max_iter >= 1")


@dataclass
class InjectionSet:
    """Net consumed power per (bus, phase), in pu.

    Discharging batteries and switched-on capacitors appear as negative
    consumption.
    """
    p: dict[tuple[str, int], float] = field(default_factory=dict)
    q: dict[tuple[str, int], float] = field(default_factory=dict)

    def add(self, bus: str, phase: int, p_pu: float = 0.0, q_pu: float = 0.0):
        key = (bus, phase)
        self.p[key] = self.p.get(key, 0.0) + p_pu
        self.q[key] = self.q.get(key, 0.0) + q_pu


@dataclass
class PowerFlowSolution:
    v: dict[tuple[str, int], float]            # bus voltage magnitude, pu
    p_flow: dict[tuple[str, int], float]       # sending-end P per (edge, phase)
    q_flow: dict[tuple[str, int], float]
    l_flow: dict[tuple[str, int], float]       # squared current magnitude
    total_loss_pu: float
    substation_p_pu: float
    iterations: int
    converged: bool


def build_injections(circuit: Circuit, multipliers: dict[str, float],
                     device_state: DeviceState, load_scale: float = 1.0) -> InjectionSet:
    """Aggregate loads, capacitor vars, and battery power into pu injections."""
    base_kw = circuit.base_mva * 1000.0
    inj = InjectionSet()
    for load in circuit.loads.values():
        m = multipliers.get(load.profile_key, 1.0) * load_scale
        inj.add(load.bus, load.phase, p_pu=load.base_p_kw * m / base_kw,
                q_pu=load.base_q_kvar * m / base_kw)
    for cap in circuit.capacitors.values():
        if device_state.caps[cap.id].status:
            for p in cap.phases:
                inj.add(cap.bus, p, q_pu=-cap.q_rating_kvar / base_kw)
    for bat in circuit.batteries.values():
        p_kw = device_state.bats[bat.id].last_p_kw  # positive = discharging
        share = p_kw / len(bat.phases)
        for p in bat.phases:
            inj.add(bat.bus, p, p_pu=-share / base_kw)
    return inj


def _edge_ratio(edge, device_state: DeviceState, circuit: Circuit, phase: int) -> float:
    if edge.kind == "transformer":
        return edge.ratio
    reg_id = edge.regulators[phase]
    spec = circuit.regulators[reg_id]
    return regulator_ratio(device_state.regs[reg_id].tap, spec)


def solve(circuit: Circuit, device_state: DeviceState, injections: InjectionSet,
          cfg: SolverConfig | None = None) -> PowerFlowSolution:
    """Solve the branch-flow equations; deterministic for fixed inputs.

    Returns a best-effort solution flagged ``converged=False`` if the fixed
    point does not settle within cfg.max_iter.  Raises SingularOperatingPoint
    on voltage collapse.
    """
    cfg = cfg or SolverConfig()
    v2 = {key: circuit.source_v_pu ** 2 for key in
          ((b, p) for b, p in circuit.bus_phase_pairs())}
    p_flow: dict[tuple[str, int], float] = {}
    q_flow: dict[tuple[str, int], float] = {}
    l_flow: dict[tuple[str, int], float] = {}

    converged = False
    iterations = 0
    for it in range(1, cfg.max_iter + 1):
        iterations = it
        max_dv = 0.0
        for phase in PHASES:
            order = circuit.phase_edges(phase)
            if not order:
                continue
            # Backward: accumulate sending-end flows from the leaves.
            for edge in reversed(order):
                key = (edge.id, phase)
                p = injections.p.get((edge.to_bus, phase), 0.0)
                q = injections.q.get((edge.to_bus, phase), 0.0)
                for child in circuit.children(phase, edge.to_bus):
                    p += p_flow[(child.id, phase)]
                    q += q_flow[(child.id, phase)]
                if edge.kind == LINE:
                    l = l_flow.get(key, 0.0)
                    p += edge.r_pu[phase] * l
                    q += edge.x_pu[phase] * l
                p_flow[key] = p
                q_flow[key] = q
            # Forward: voltage drop from the root, then refresh l.
            for edge in order:
                key = (edge.id, phase)
                v2_from = v2[(edge.from_bus, phase)]
                if edge.kind == LINE:
                    r, x = edge.r_pu[phase], edge.x_pu[phase]
                    pf, qf = p_flow[key], q_flow[key]
                    l = (pf * pf + qf * qf) / v2_from
                    l_flow[key] = l
                    v2_new = (v2_from - 2.0 * (r * pf + x * qf)
                              + (r * r + x * x) * l)
                else:
                    ratio = _edge_ratio(edge, device_state, circuit, phase)
                    l_flow[key] = 0.0
                    v2_new = ratio * ratio * v2_from
                # "not >=" also catches NaN from a diverging iterate
                if not v2_new >= V2_COLLAPSE:
                    raise SingularOperatingPoint(
                        f"voltage collapse at bus {edge.to_bus} phase {phase} "
                        f"(v^2 = {v2_new:.3e})")
                old = v2[(edge.to_bus, phase)]
                v2[(edge.to_bus, phase)] = v2_new
                max_dv = max(max_dv, abs(v2_new ** 0.5 - old ** 0.5))
        if max_dv <= cfg.tol:
            converged = True
            break

    total_loss = 0.0
    for phase in PHASES:
        for edge in circuit.phase_edges(phase):
            if edge.kind == LINE:
                total_loss += edge.r_pu[phase] * l_flow[(edge.id, phase)]

    substation_p = 0.0
    for phase in PHASES:
        for edge in circuit.children(phase, circuit.source_bus):
            substation_p += p_flow[(edge.id, phase)]
        substation_p += injections.p.get((circuit.source_bus, phase), 0.0)

    return PowerFlowSolution(
        v={k: v ** 0.5 for k, v in v2.items()},
        p_flow=p_flow, q_flow=q_flow, l_flow=l_flow,
        total_loss_pu=total_loss, substation_p_pu=substation_p,
        iterations=iterations, converged=converged)


def residual(circuit: Circuit, device_state: DeviceState, injections: InjectionSet,
             solution: PowerFlowSolution) -> float:
    """Max absolute violation of the four branch-flow equations.

    Ratio edges are checked against v_child = ratio * v_parent and l = 0 in
    place of the impedance-drop and current-definition lines.
    """
    keys = set(solution.v)
    expected = set(circuit.bus_phase_pairs())
    if keys != expected:
        raise DimensionMismatch("solution voltages do not cover the circuit's (bus, phase) pairs")

    worst = 0.0
    for phase in PHASES:
        for edge in circuit.phase_edges(phase):
            key = (edge.id, phase)
            if key not in solution.p_flow:
                raise DimensionMismatch(f"missing flow for edge {edge.id} phase {phase}")
            p_ij = solution.p_flow[key]
            q_ij = solution.q_flow[key]
            l_ij = solution.l_flow[key]
            v_i = solution.v[(edge.from_bus, phase)]
            v_j = solution.v[(edge.to_bus, phase)]

            p_down = sum(solution.p_flow[(c.id, phase)]
                         for c in circuit.children(phase, edge.to_bus))
            q_down = sum(solution.q_flow[(c.id, phase)]
                         for c in circuit.children(phase, edge.to_bus))
            p_j = injections.p.get((edge.to_bus, phase), 0.0)
            q_j = injections.q.get((edge.to_bus, phase), 0.0)

            if edge.kind == LINE:
                r, x = edge.r_pu[phase], edge.x_pu[phase]
                worst = max(
                    worst,
                    abs(p_j - (p_ij - r * l_ij - p_down)),
                    abs(q_j - (q_ij - x * l_ij - q_down)),
                    abs(v_j ** 2 - (v_i ** 2 - 2.0 * (r * p_ij + x * q_ij)
                                    + (r * r + x * x) * l_ij)),
                    abs(l_ij - (p_ij ** 2 + q_ij ** 2) / v_i ** 2),
                )
            else:
                ratio = _edge_ratio(edge, device_state, circuit, phase)
                worst = max(
                    worst,
                    abs(p_j - (p_ij - p_down)),
                    abs(q_j - (q_ij - q_down)),
                    abs(v_j - ratio * v_i),
                    abs(l_ij),
                )
    return worst
