import pytest

from voltvar.circuit import (Bus, BatterySpec, CapacitorSpec, Circuit, Edge,
                             Load, RegulatorSpec)
from voltvar.env import EnvConfig, VoltVarEnv
from voltvar.profiles import generate_profiles
from voltvar.registry import load_circuit


def single_phase_line(eid, frm, to, r, x):
    return Edge(id=eid, from_bus=frm, to_bus=to, phases=(0,), kind="line",
                r_pu={0: r}, x_pu={0: x})


@pytest.fixture
def two_bus():
    """1-phase, 2-bus feeder: r = x = 0.01 pu line, 100 kW / 50 kvar load."""
    return Circuit(
        buses=[Bus("src", (0,), 2.4), Bus("b1", (0,), 2.4)],
        edges=[single_phase_line("ln", "src", "b1", 0.01, 0.01)],
        loads=[Load("ld", "b1", 0, 100.0, 50.0, "ld")],
        capacitors=[], regulators=[], batteries=[],
        source_bus="src")


@pytest.fixture
def zero_load_circuit():
    """2-bus single-phase circuit with one battery and no loads."""
    return Circuit(
        buses=[Bus("src", (0,), 2.4), Bus("b1", (0,), 2.4)],
        edges=[single_phase_line("ln", "src", "b1", 0.01, 0.01)],
        loads=[],
        capacitors=[], regulators=[],
        batteries=[BatterySpec("bat", "b1", (0,), e_max_kwh=200.0, p_max_kw=100.0)],
        source_bus="src")


@pytest.fixture
def reg_circuit():
    """src -> mid (regulator edge) -> leaf (line), single phase, no load."""
    redge = Edge(id="re", from_bus="src", to_bus="mid", phases=(0,),
                 kind="regulator", regulators={0: "reg"})
    return Circuit(
        buses=[Bus("src", (0,), 2.4), Bus("mid", (0,), 2.4), Bus("leaf", (0,), 2.4)],
        edges=[redge, single_phase_line("ln", "mid", "leaf", 0.005, 0.005)],
        loads=[Load("ld", "leaf", 0, 50.0, 20.0, "ld")],
        capacitors=[],
        regulators=[RegulatorSpec("reg", "re", 0)],
        batteries=[],
        source_bus="src")


from envtools import build_env  # noqa: E402  (shared by fixtures below)


@pytest.fixture
def zero_load_env(zero_load_circuit):
    return build_env(zero_load_circuit, w_power=10.0, w_dis=6.0 / 33, w_soc=100.0 / 33)


@pytest.fixture(scope="session")
def circuit_13():
    return load_circuit("13bus.json")


@pytest.fixture(scope="session")
def circuit_34():
    return load_circuit("34bus.json")
