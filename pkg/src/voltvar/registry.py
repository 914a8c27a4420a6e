"""Environment registry: name parsing, spec storage, and make_env.

Registered names follow ``<base>[_cbat][_soc][_s<scale>]``: ``cbat`` switches
the battery action to continuous, ``soc`` switches the (dis_w, soc_w) pair to
the with-soc coefficient set, and ``_sN.N`` multiplies all load profiles.

Bundled entries live in ``data/registry.json``.  A circuit_file of the form
``generate:<n_buses>:seed=<s>:caps=<c>:regs=<r>:bats=<b>`` builds a synthetic
radial system instead of loading a file; this stands in for the large-scale
instances whose source data is not redistributable.
"""

from __future__ import annotations

import importlib.resources
import json
import re
import threading
from dataclasses import dataclass, replace

from .circuit import (Circuit, DeviceDensity, RegulatorSpec, generate_radial_system,
                      parse_circuit)
from .devices import CONTINUOUS
from .env import EnvConfig, VoltVarEnv
from .errors import (CircuitLoadError, DuplicateName, InvalidSpec,
                     MalformedScale, UnknownSystem, VoltVarError)
from .profiles import generate_profiles, scale_profiles

DEFAULT_N_PROFILES = 48
PROFILE_SEED = 2021


@dataclass(frozen=True)
class EnvSpec:
    system_name: str
    circuit_file: str
    max_episode_steps: int = 24
    reg_act_num: int = 33
    bat_act_num: object = 33  # int, or "continuous"
    power_w: float = 1.0
    cap_w: float = 1.0 / 33
    reg_w: float = 1.0 / 33
    soc_w: float = 0.0
    dis_w: float = 0.0
    # with-soc variant of the (dis_w, soc_w) pair
    soc_variant_dis_w: float | None = None
    soc_variant_soc_w: float | None = None

    def validate(self):
        if self.max_episode_steps < 1:
            raise InvalidSpec("max_episode_steps must be >= 1")
        if self.bat_act_num != CONTINUOUS and int(self.bat_act_num) < 2:
            raise InvalidSpec("bat_act_num must be >= 2 or 'continuous'")
        if self.reg_act_num < 2:
            raise InvalidSpec("reg_act_num must be >= 2")
        for w in (self.power_w, self.cap_w, self.reg_w, self.soc_w, self.dis_w):
            if w < 0:
                raise InvalidSpec("reward weights must be >= 0")


@dataclass(frozen=True)
class EnvName:
    base: str
    cbat: bool = False
    soc: bool = False
    scale: float = 1.0


_NAME_RE = re.compile(r"^(?P<base>.*?)(?P<cbat>_cbat)?(?P<soc>_soc)?(?P<scale>_s[^_]*)?$")

_registry: dict[str, EnvSpec] = {}
_lock = threading.Lock()
_bundled_loaded = False


def _ensure_bundled():
    global _bundled_loaded
    with _lock:
        if _bundled_loaded:
            return
        _bundled_loaded = True
        try:
            text = (importlib.resources.files("voltvar.data")
                    .joinpath("registry.json").read_text())
        except FileNotFoundError:
            return
        for name, doc in json.loads(text).items():
            _registry.setdefault(name, _spec_from_dict(doc))


def parse_env_name(name: str) -> EnvName:
    _ensure_bundled()
    m = _NAME_RE.match(name)
    base = m.group("base")
    scale = 1.0
    if m.group("scale"):
        raw = m.group("scale")[2:]
        try:
            scale = float(raw)
        except ValueError:
            raise MalformedScale(f"bad scale suffix {raw!r} in {name!r}") from None
        if scale <= 0:
            raise MalformedScale(f"scale must be > 0, got {scale}")
    if base not in _registry:
        raise UnknownSystem(f"unknown system {base!r} (from env name {name!r})")
    return EnvName(base=base, cbat=bool(m.group("cbat")),
                   soc=bool(m.group("soc")), scale=scale)


def format_env_name(env_name: EnvName) -> str:
    out = env_name.base
    if env_name.cbat:
        out += "_cbat"
    if env_name.soc:
        out += "_soc"
    if env_name.scale != 1.0:
        out += f"_s{env_name.scale:g}"
    return out


def register(name: str, spec: EnvSpec):
    _ensure_bundled()
    spec.validate()
    with _lock:
        if name in _registry:
            raise DuplicateName(f"environment {name!r} already registered")
        _registry[name] = spec


def registered_systems() -> list[str]:
    _ensure_bundled()
    return sorted(_registry)


def get_spec(base: str) -> EnvSpec:
    _ensure_bundled()
    try:
        return _registry[base]
    except KeyError:
        raise UnknownSystem(f"unknown system {base!r}") from None


def list_envs() -> list[str]:
    """All derivable default names: base x {vanilla, cbat, soc, cbat_soc}."""
    out = []
    for base in registered_systems():
        out += [base, f"{base}_cbat", f"{base}_soc", f"{base}_cbat_soc"]
    return out


_GEN_RE = re.compile(r"^generate:(\d+):seed=(\d+):caps=(\d+):regs=(\d+):bats=(\d+)$")


def load_circuit(circuit_file: str) -> Circuit:
    gen = _GEN_RE.match(circuit_file)
    try:
        if gen:
            n, seed, caps, regs, bats = (int(g) for g in gen.groups())
            return generate_radial_system(n, seed, DeviceDensity(),
                                          device_counts=(caps, regs, bats))
        text = importlib.resources.files("voltvar.data").joinpath(circuit_file).read_text()
        return parse_circuit(text)
    except VoltVarError:
        raise
    except Exception as exc:
        raise CircuitLoadError(f"cannot load circuit {circuit_file!r}: {exc}") from exc


def _with_tap_count(circuit: Circuit, n_taps: int) -> Circuit:
    if all(r.n_taps == n_taps for r in circuit.regulators.values()):
        return circuit
    regs = [replace(r, n_taps=n_taps) for r in circuit.regulators.values()]
    return Circuit(list(circuit.buses.values()), list(circuit.edges.values()),
                   list(circuit.loads.values()), list(circuit.capacitors.values()),
                   regs, list(circuit.batteries.values()),
                   circuit.source_bus, circuit.source_v_pu, circuit.base_mva)


def make_env(name: str, worker_idx: int | None = None,
             n_profiles: int = DEFAULT_N_PROFILES) -> VoltVarEnv:
    """Construct an environment from a registered name.

    ``worker_idx`` offsets the environment's seed stream so parallel workers
    draw distinct action/profile orderings; construction never touches shared
    mutable state.
    """
    env_name = parse_env_name(name)
    spec = get_spec(env_name.base)
    circuit = load_circuit(spec.circuit_file)
    circuit = _with_tap_count(circuit, spec.reg_act_num)

    keys = sorted({l.profile_key for l in circuit.loads.values()})
    profs = generate_profiles(n_profiles, spec.max_episode_steps, keys, PROFILE_SEED)
    if env_name.scale != 1.0:
        profs = scale_profiles(profs, env_name.scale)

    dis_w, soc_w = spec.dis_w, spec.soc_w
    if env_name.soc:
        if spec.soc_variant_dis_w is None or spec.soc_variant_soc_w is None:
            raise InvalidSpec(f"{env_name.base!r} has no with-soc coefficient variant")
        dis_w, soc_w = spec.soc_variant_dis_w, spec.soc_variant_soc_w

    config = EnvConfig(
        horizon=spec.max_episode_steps,
        bat_mode=CONTINUOUS if env_name.cbat else spec.bat_act_num,
        w_power=spec.power_w, w_cap=spec.cap_w, w_reg=spec.reg_w,
        w_dis=dis_w, w_soc=soc_w,
    )
    return VoltVarEnv(circuit, profs, config, seed=worker_idx or 0)


def _spec_from_dict(doc: dict) -> EnvSpec:
    soc_variant = doc.get("soc_variant", {})
    return EnvSpec(
        system_name=doc["system_name"],
        circuit_file=doc["circuit_file"],
        max_episode_steps=int(doc.get("max_episode_steps", 24)),
        reg_act_num=int(doc.get("reg_act_num", 33)),
        bat_act_num=(doc["bat_act_num"] if doc.get("bat_act_num") == CONTINUOUS
                     else int(doc.get("bat_act_num", 33))),
        power_w=float(doc.get("power_w", 1.0)),
        cap_w=float(doc.get("cap_w", 1.0 / 33)),
        reg_w=float(doc.get("reg_w", 1.0 / 33)),
        soc_w=float(doc.get("soc_w", 0.0)),
        dis_w=float(doc.get("dis_w", 0.0)),
        soc_variant_dis_w=(float(soc_variant["dis_w"]) if "dis_w" in soc_variant else None),
        soc_variant_soc_w=(float(soc_variant["soc_w"]) if "soc_w" in soc_variant else None),
    )
