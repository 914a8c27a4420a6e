"""Shared test helpers: quick environment construction over any circuit."""

from voltvar.env import EnvConfig, VoltVarEnv
from voltvar.profiles import generate_profiles


def build_env(circuit, horizon=24, seed=0, **cfg_kwargs):
    keys = sorted({l.profile_key for l in circuit.loads.values()})
    profs = generate_profiles(8, horizon, keys, seed=42)
    return VoltVarEnv(circuit, profs, EnvConfig(horizon=horizon, **cfg_kwargs), seed=seed)
