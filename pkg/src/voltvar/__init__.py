"""Volt-Var control simulation: radial circuits, DistFlow power flow, and a
finite-horizon control environment with baseline policies and a CLI."""

from .circuit import (Bus, BatterySpec, CapacitorSpec, Circuit, DeviceDensity,
                      Edge, Load, RegulatorSpec, generate_radial_system,
                      parse_circuit, serialize_circuit, validate_radial)
from .devices import (CONTINUOUS, BatteryState, CapacitorState, DeviceState,
                      RegulatorState, apply_battery, battery_target_power,
                      initial_device_state, regulator_ratio)
from .env import EnvConfig, RewardBreakdown, VoltVarEnv, f_ctrl, f_power, f_volt
from .powerflow import (InjectionSet, PowerFlowSolution, SolverConfig,
                        build_injections, residual, solve)
from .profiles import (LoadProfileSet, ProfileSplit, generate_profiles,
                       scale_profiles, split)
from .registry import (EnvName, EnvSpec, format_env_name, list_envs, make_env,
                       parse_env_name, register)

__version__ = "0.1.0"
