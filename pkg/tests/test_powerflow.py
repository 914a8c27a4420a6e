import math

import pytest

from oracle_newton import newton_solve
from voltvar.circuit import DeviceDensity, generate_radial_system
from voltvar.devices import RegulatorState, initial_device_state
from voltvar.errors import DimensionMismatch, SingularOperatingPoint
from voltvar.powerflow import (InjectionSet, SolverConfig, build_injections,
                               residual, solve)

# Newton-oracle voltage for the two_bus fixture (r = x = 0.01 pu,
# p = 0.1, q = 0.05 pu), frozen from tests/oracle_newton.py.
TWO_BUS_V1 = 0.9984976176592139


def base_case(circuit):
    state = initial_device_state(circuit)
    inj = build_injections(circuit, {}, state)
    return state, inj


def test_two_bus_matches_newton_oracle(two_bus):
    state, inj = base_case(two_bus)
    sol = solve(two_bus, state, inj, SolverConfig(tol=1e-12))
    assert sol.converged
    assert sol.v[("b1", 0)] == pytest.approx(TWO_BUS_V1, abs=1e-8)
    v_oracle, _ = newton_solve(two_bus, state, inj)
    assert sol.v[("b1", 0)] == pytest.approx(v_oracle[("b1", 0)], abs=1e-8)


def test_zero_load_flat_profile(zero_load_circuit):
    state, inj = base_case(zero_load_circuit)
    sol = solve(zero_load_circuit, state, inj)
    assert sol.converged
    assert all(v == 1.0 for v in sol.v.values())
    assert all(l == 0.0 for l in sol.l_flow.values())
    assert sol.total_loss_pu == 0.0
    assert residual(zero_load_circuit, state, inj, sol) == 0.0


def test_regulator_edge_is_ideal_ratio(reg_circuit):
    state = initial_device_state(reg_circuit)
    # tap 24 with defaults -> ratio 0.9 + 24 * 0.2/32 = 1.05
    state.regs["reg"] = RegulatorState(24)
    inj = InjectionSet()  # ignore the load: zero injections
    sol = solve(reg_circuit, state, inj)
    assert sol.v[("mid", 0)] == pytest.approx(1.05, abs=1e-12)
    assert sol.v[("leaf", 0)] == pytest.approx(1.05, abs=1e-12)


def test_residual_detects_perturbation(zero_load_circuit):
    state, inj = base_case(zero_load_circuit)
    sol = solve(zero_load_circuit, state, inj)
    sol.v[("b1", 0)] += 0.01
    assert residual(zero_load_circuit, state, inj, sol) > 1e-4


def test_residual_dimension_mismatch(two_bus, zero_load_circuit):
    state, inj = base_case(two_bus)
    sol = solve(two_bus, state, inj)
    other_state, other_inj = base_case(zero_load_circuit)
    sol.v[("ghost", 0)] = 1.0
    with pytest.raises(DimensionMismatch):
        residual(two_bus, state, inj, sol)


def test_converged_residual_within_bound(circuit_13, circuit_34):
    for circuit in (circuit_13, circuit_34):
        state, inj = base_case(circuit)
        cfg = SolverConfig(tol=1e-8)
        sol = solve(circuit, state, inj, cfg)
        assert sol.converged
        assert residual(circuit, state, inj, sol) <= 10 * cfg.tol


def test_conservation_identity(circuit_13):
    state, inj = base_case(circuit_13)
    sol = solve(circuit_13, state, inj, SolverConfig(tol=1e-10))
    consumed = sum(inj.p.values())
    assert sol.substation_p_pu == pytest.approx(consumed + sol.total_loss_pu, abs=1e-7)


def test_monotone_loading(circuit_13, circuit_34):
    for circuit in (circuit_13, circuit_34):
        state = initial_device_state(circuit)
        prev_min = None
        for k in (1.0, 1.5, 2.0, 2.5):
            inj = build_injections(circuit, {}, state, load_scale=k)
            sol = solve(circuit, state, inj)
            vmin = min(sol.v.values())
            if prev_min is not None:
                assert vmin <= prev_min + 1e-12
            prev_min = vmin


def test_solver_determinism(circuit_13):
    state, inj = base_case(circuit_13)
    a = solve(circuit_13, state, inj)
    b = solve(circuit_13, state, inj)
    assert a.v == b.v and a.p_flow == b.p_flow and a.l_flow == b.l_flow
    assert a.total_loss_pu == b.total_loss_pu


def test_voltage_collapse_raises(two_bus):
    state = initial_device_state(two_bus)
    inj = InjectionSet()
    inj.add("b1", 0, p_pu=60.0, q_pu=30.0)  # far beyond maximum loadability
    with pytest.raises(SingularOperatingPoint):
        solve(two_bus, state, inj)


@pytest.mark.parametrize("seed", range(8))
def test_sweep_matches_newton_on_random_circuits(seed):
    circuit = generate_radial_system(5, seed=seed, density=DeviceDensity(0, 0, 0))
    state, inj = base_case(circuit)
    sol = solve(circuit, state, inj, SolverConfig(tol=1e-12))
    assert sol.converged
    v_oracle, oracle_res = newton_solve(circuit, state, inj)
    assert oracle_res < 1e-10
    for key, v in v_oracle.items():
        assert sol.v[key] == pytest.approx(v, abs=1e-6)


def test_sweep_matches_newton_with_ratio_edges(reg_circuit):
    state = initial_device_state(reg_circuit)
    state.regs["reg"] = RegulatorState(10)
    inj = build_injections(reg_circuit, {}, state)
    sol = solve(reg_circuit, state, inj, SolverConfig(tol=1e-12))
    v_oracle, _ = newton_solve(reg_circuit, state, inj)
    for key, v in v_oracle.items():
        assert sol.v[key] == pytest.approx(v, abs=1e-6)
