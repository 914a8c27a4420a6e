"""Independent dense Newton-Raphson solver for the branch-flow equations.

Deliberately shares no code with voltvar.powerflow: it builds one flat
nonlinear system over all (edge, phase) flow variables and non-source squared
voltages and hands it to scipy's root finder.  Used as the oracle for
sweep-solver equivalence tests.
"""

import numpy as np
from scipy.optimize import fsolve

from voltvar.devices import regulator_ratio

PHASES = (0, 1, 2)


def newton_solve(circuit, device_state, injections):
    """Returns (voltages dict keyed by (bus, phase), max |residual|)."""
    edge_keys = []
    for p in PHASES:
        for e in circuit.edges.values():
            if p in e.phases:
                edge_keys.append((e.id, p))
    edge_keys.sort()
    v_keys = sorted((b, p) for b, p in circuit.bus_phase_pairs()
                    if b != circuit.source_bus)

    n_e = len(edge_keys)
    v_idx = {k: 3 * n_e + i for i, k in enumerate(v_keys)}
    p_idx = {k: 3 * i for i, k in enumerate(edge_keys)}
    q_idx = {k: 3 * i + 1 for i, k in enumerate(edge_keys)}
    l_idx = {k: 3 * i + 2 for i, k in enumerate(edge_keys)}

    children = {}
    for e in circuit.edges.values():
        children.setdefault(e.from_bus, []).append(e)
    v2_src = circuit.source_v_pu ** 2

    def v2_of(x, bus, phase):
        if bus == circuit.source_bus:
            return v2_src
        return x[v_idx[(bus, phase)]]

    def ratio_of(e, phase):
        if e.kind == "transformer":
            return e.ratio
        rid = e.regulators[phase]
        return regulator_ratio(device_state.regs[rid].tap, circuit.regulators[rid])

    def residuals(x):
        out = np.empty(len(x))
        row = 0
        for (eid, ph) in edge_keys:
            e = circuit.edges[eid]
            pij = x[p_idx[(eid, ph)]]
            qij = x[q_idx[(eid, ph)]]
            lij = x[l_idx[(eid, ph)]]
            v2_i = v2_of(x, e.from_bus, ph)
            v2_j = v2_of(x, e.to_bus, ph)
            down_p = sum(x[p_idx[(c.id, ph)]] for c in children.get(e.to_bus, [])
                         if ph in c.phases)
            down_q = sum(x[q_idx[(c.id, ph)]] for c in children.get(e.to_bus, [])
                         if ph in c.phases)
            pj = injections.p.get((e.to_bus, ph), 0.0)
            qj = injections.q.get((e.to_bus, ph), 0.0)
            if e.kind == "line":
                r, xx = e.r_pu[ph], e.x_pu[ph]
                out[row] = pj - (pij - r * lij - down_p)
                out[row + 1] = qj - (qij - xx * lij - down_q)
                out[row + 2] = v2_j - (v2_i - 2 * (r * pij + xx * qij)
                                       + (r * r + xx * xx) * lij)
                out[row + 3] = lij - (pij ** 2 + qij ** 2) / v2_i
            else:
                ra = ratio_of(e, ph)
                out[row] = pj - (pij - down_p)
                out[row + 1] = qj - (qij - down_q)
                out[row + 2] = v2_j - ra * ra * v2_i
                out[row + 3] = lij
            row += 4
        return out[:row]

    # Square system: 4 equations and 4 unknowns (p, q, l, v2_child) per edge.
    x0 = np.zeros(3 * n_e + len(v_keys))
    for k in v_keys:
        x0[v_idx[k]] = v2_src
    sol, info, ok, _ = fsolve(residuals, x0, full_output=True, xtol=1e-13)
    res = residuals(sol)
    v = {(circuit.source_bus, p): circuit.source_v_pu
         for p in circuit.buses[circuit.source_bus].phases}
    for k in v_keys:
        v[k] = float(np.sqrt(sol[v_idx[k]]))
    return v, float(np.max(np.abs(res)))
