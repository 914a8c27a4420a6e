"""Finite-horizon Volt-Var control MDP over a radial circuit.

Episodes run H hourly steps.  An action sets capacitor statuses and regulator
taps directly and commands battery power, which is projected onto the battery
state-of-charge limits.  The reward is the negative sum of a voltage-violation
term, a loss-ratio term, and device switching/discharge/soc penalties.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .devices import (CONTINUOUS, BatteryState, CapacitorState, DeviceState,
                      RegulatorState, apply_battery, battery_target_power,
                      initial_device_state)
from .errors import (EpisodeOver, InvalidAction, KeyMismatch,
                     SingularOperatingPoint, UnknownProfile)
from .powerflow import (PowerFlowSolution, SolverConfig, build_injections,
                        residual, solve)
from .profiles import LoadProfileSet

V_UPPER = 1.05
V_LOWER = 0.95


@dataclass
class EnvConfig:
    horizon: int = 24
    bat_mode: object = 33  # int N_bat_act, or the string "continuous"
    w_power: float = 1.0
    w_cap: float = 1.0 / 33
    w_reg: float = 1.0 / 33
    w_dis: float = 0.0
    w_soc: float = 0.0
    v_upper: float = V_UPPER
    v_lower: float = V_LOWER
    load_scale: float = 1.0
    dt_hours: float = 1.0
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not self.v_lower < self.v_upper:
            raise ValueError("need v_lower < v_upper")
        for w in (self.w_power, self.w_cap, self.w_reg, self.w_dis, self.w_soc):
            if w < 0:
                raise ValueError("reward weights must be >= 0")


@dataclass
class RewardBreakdown:
    f_volt: float
    f_power: float
    cap_error: float
    reg_error: float
    dis_error: float
    soc_error: float

    @property
    def total(self) -> float:
        return -(self.f_volt + self.f_power + self.cap_error
                 + self.reg_error + self.dis_error + self.soc_error)


def f_volt(solution: PowerFlowSolution, circuit: Circuit,
           v_upper: float = V_UPPER, v_lower: float = V_LOWER) -> float:
    """Sum over buses of the worst-phase over/under-voltage excursions.

    The source bus is excluded: its voltage is fixed by definition.
    """
    total = 0.0
    for bid in sorted(circuit.buses):
        if bid == circuit.source_bus:
            continue
        vs = [solution.v[(bid, p)] for p in circuit.buses[bid].phases]
        total += max(max(vs) - v_upper, 0.0) + max(v_lower - min(vs), 0.0)
    return total


def f_power(solution: PowerFlowSolution, w_power: float) -> tuple[float, bool]:
    """Weighted loss-to-total-power ratio; (value, degenerate flag).

    Total power is the substation active draw; a non-positive draw (zero load
    or reverse flow) is degenerate and scores 0.
    """
    if solution.substation_p_pu <= 0.0:
        return 0.0, True
    return w_power * solution.total_loss_pu / solution.substation_p_pu, False


def f_ctrl(prev: DeviceState, new: DeviceState, i: int, circuit: Circuit,
           cfg: EnvConfig) -> tuple[float, float, float, float]:
    """Switching, discharge, and end-of-episode soc penalties.

    ``i`` is the index of the just-completed step (0-based); the soc penalty
    applies only on the transition completing step H-1.
    """
    if set(prev.caps) != set(new.caps) or set(prev.regs) != set(new.regs) \
            or set(prev.bats) != set(new.bats):
        raise KeyMismatch("device states do not share keys")
    cap_error = sum(cfg.w_cap * abs(prev.caps[c].status - new.caps[c].status)
                    for c in new.caps)
    reg_error = sum(cfg.w_reg * abs(prev.regs[r].tap - new.regs[r].tap)
                    for r in new.regs)
    dis_error = sum(cfg.w_dis * max(new.bats[b].last_p_kw, 0.0)
                    / circuit.batteries[b].p_max_kw for b in new.bats)
    soc_error = 0.0
    if i == cfg.horizon - 1:
        soc_error = sum(cfg.w_soc * abs(new.bats[b].soc - circuit.batteries[b].soc0)
                        for b in new.bats)
    return cap_error, reg_error, dis_error, soc_error


@dataclass(frozen=True)
class ActionSlot:
    kind: str       # "cap" | "reg" | "bat"
    device_id: str
    type: str       # "discrete" | "continuous"
    n: int = 0      # discrete cardinality
    low: float = -1.0
    high: float = 1.0


class VoltVarEnv:
    """Single-threaded episodic environment; reset/step must be serialized."""

    def __init__(self, circuit: Circuit, profiles: LoadProfileSet,
                 config: EnvConfig | None = None, seed: int = 0):
        self.circuit = circuit
        self.profiles = profiles
        self.config = config or EnvConfig()
        self.cap_ids = sorted(circuit.capacitors)
        self.reg_ids = sorted(circuit.regulators)
        self.bat_ids = sorted(circuit.batteries)
        self._rng = np.random.default_rng(seed)

        self._i = None
        self._done = True
        self._profile_idx = None
        self._state: DeviceState | None = None
        self._solution: PowerFlowSolution | None = None
        self._last_converged = True

    # -- spaces ------------------------------------------------------------

    def action_slots(self) -> list[ActionSlot]:
        slots = [ActionSlot("cap", c, "discrete", n=2) for c in self.cap_ids]
        slots += [ActionSlot("reg", r, "discrete", n=self.circuit.regulators[r].n_taps)
                  for r in self.reg_ids]
        if self.config.bat_mode == CONTINUOUS:
            slots += [ActionSlot("bat", b, "continuous") for b in self.bat_ids]
        else:
            slots += [ActionSlot("bat", b, "discrete", n=int(self.config.bat_mode))
                      for b in self.bat_ids]
        return slots

    @property
    def action_dim(self) -> int:
        return len(self.cap_ids) + len(self.reg_ids) + len(self.bat_ids)

    @property
    def obs_dim(self) -> int:
        return (len(self.circuit.bus_phase_pairs()) + len(self.cap_ids)
                + len(self.reg_ids) + 2 * len(self.bat_ids))

    # -- gym surface ---------------------------------------------------------

    def seed(self, value: int):
        self._rng = np.random.default_rng(value)

    def reset(self, profile_idx: int = 0) -> np.ndarray:
        if not isinstance(profile_idx, (int, np.integer)) or \
                not 0 <= profile_idx < self.profiles.n_profiles:
            raise UnknownProfile(f"profile_idx {profile_idx} outside "
                                 f"[0, {self.profiles.n_profiles - 1}]")
        self._i = 0
        self._done = self.config.horizon == 0
        self._profile_idx = int(profile_idx)
        self._state = initial_device_state(self.circuit)
        self._solution, self._last_converged = self._solve(self._state, hour=0)
        return self.wrap_obs(self.obs)

    def step(self, action) -> tuple[np.ndarray, float, bool, dict]:
        if self._i is None:
            raise EpisodeOver("step() before reset()")
        if self._done:
            raise EpisodeOver(f"episode finished at step {self._i}")
        new_state, solution, converged, breakdown, info = self._simulate(action)
        self._state = new_state
        self._solution = solution
        self._last_converged = converged
        self._i += 1
        self._done = self._i >= self.config.horizon
        return self.wrap_obs(self.obs), breakdown.total, self._done, info

    def peek_step(self, action) -> tuple[float, dict]:
        """Reward of taking ``action`` now, without committing the transition."""
        if self._i is None or self._done:
            raise EpisodeOver("cannot peek outside a running episode")
        _, _, _, breakdown, info = self._simulate(action)
        return breakdown.total, info

    def random_action(self):
        out = []
        for slot in self.action_slots():
            if slot.type == "discrete":
                out.append(int(self._rng.integers(0, slot.n)))
            else:
                out.append(float(self._rng.uniform(slot.low, slot.high)))
        return out

    # -- internals -----------------------------------------------------------

    def _solve(self, state: DeviceState, hour: int):
        mult = self.profiles.multipliers_at(self._profile_idx, hour)
        inj = build_injections(self.circuit, mult, state, self.config.load_scale)
        try:
            sol = solve(self.circuit, state, inj, self.config.solver)
            return sol, sol.converged
        except SingularOperatingPoint:
            # Best effort: keep the previous solution's voltages, flag failure.
            if self._solution is not None:
                prev = self._solution
                sol = PowerFlowSolution(v=dict(prev.v), p_flow=dict(prev.p_flow),
                                        q_flow=dict(prev.q_flow), l_flow=dict(prev.l_flow),
                                        total_loss_pu=prev.total_loss_pu,
                                        substation_p_pu=prev.substation_p_pu,
                                        iterations=0, converged=False)
            else:
                v = {k: self.circuit.source_v_pu for k in self.circuit.bus_phase_pairs()}
                sol = PowerFlowSolution(v=v, p_flow={}, q_flow={}, l_flow={},
                                        total_loss_pu=0.0, substation_p_pu=0.0,
                                        iterations=0, converged=False)
            return sol, False

    def validate_action(self, action):
        slots = self.action_slots()
        try:
            n = len(action)
        except TypeError:
            raise InvalidAction("action must be a sequence") from None
        if n != len(slots):
            raise InvalidAction(f"action length {n} != {len(slots)} "
                                f"(caps {len(self.cap_ids)} + regs {len(self.reg_ids)}"
                                f" + bats {len(self.bat_ids)})")
        for idx, (slot, val) in enumerate(zip(slots, action)):
            if slot.type == "discrete":
                if float(val) != int(val) or not 0 <= int(val) < slot.n:
                    raise InvalidAction(
                        f"slot {idx} ({slot.kind} {slot.device_id}): {val!r} "
                        f"not in {{0,...,{slot.n - 1}}}")
            else:
                if not slot.low <= float(val) <= slot.high:
                    raise InvalidAction(
                        f"slot {idx} ({slot.kind} {slot.device_id}): {val!r} "
                        f"not in [{slot.low}, {slot.high}]")

    def _simulate(self, action):
        self.validate_action(action)
        prev = self._state
        new = prev.copy()
        pos = 0
        for cid in self.cap_ids:
            new.caps[cid] = CapacitorState(int(action[pos]))
            pos += 1
        for rid in self.reg_ids:
            new.regs[rid] = RegulatorState(int(action[pos]))
            pos += 1
        for bid in self.bat_ids:
            spec = self.circuit.batteries[bid]
            attempted = battery_target_power(action[pos], self.config.bat_mode, spec)
            new.bats[bid], _ = apply_battery(prev.bats[bid], spec, attempted,
                                             self.config.dt_hours)
            pos += 1

        solution, converged = self._solve(new, hour=self._i + 1)
        fv = f_volt(solution, self.circuit, self.config.v_upper, self.config.v_lower)
        fp, degenerate = f_power(solution, self.config.w_power)
        cap_e, reg_e, dis_e, soc_e = f_ctrl(prev, new, self._i, self.circuit, self.config)
        breakdown = RewardBreakdown(fv, fp, cap_e, reg_e, dis_e, soc_e)

        def avg(total, n):
            return total / n if n else 0.0

        info = {
            "f_volt": fv, "f_power": fp,
            "cap_error": cap_e, "reg_error": reg_e,
            "dis_error": dis_e, "soc_error": soc_e,
            "avg_cap_error": avg(cap_e, len(self.cap_ids)),
            "avg_reg_error": avg(reg_e, len(self.reg_ids)),
            "avg_dis_error": avg(dis_e, len(self.bat_ids)),
            "avg_soc_error": avg(soc_e, len(self.bat_ids)),
            "avg_soc": avg(sum(new.bats[b].soc for b in self.bat_ids),
                           len(self.bat_ids)),
            "converged": bool(converged),
            "degenerate_power": bool(degenerate),
        }
        return new, solution, converged, breakdown, info

    # -- observations ----------------------------------------------------------

    @property
    def obs(self) -> dict:
        """Structured observation for the current state."""
        state, sol = self._state, self._solution
        return {
            "voltages": {key: sol.v[key] for key in self.circuit.bus_phase_pairs()},
            "caps": {c: state.caps[c].status for c in self.cap_ids},
            "regs": {r: state.regs[r].tap for r in self.reg_ids},
            "bats": {b: (state.bats[b].soc,
                         state.bats[b].last_p_kw / self.circuit.batteries[b].p_max_kw)
                     for b in self.bat_ids},
        }

    @property
    def step_index(self) -> int:
        return self._i

    @property
    def done(self) -> bool:
        return self._done

    @property
    def device_state(self) -> DeviceState:
        return self._state

    @property
    def last_solution(self) -> PowerFlowSolution:
        return self._solution

    def wrap_obs(self, obs: dict) -> np.ndarray:
        """Flatten: voltages (bus id, phase order), caps, regs, (soc, dis) pairs."""
        vals = [obs["voltages"][key] for key in self.circuit.bus_phase_pairs()]
        vals += [float(obs["caps"][c]) for c in self.cap_ids]
        vals += [float(obs["regs"][r]) for r in self.reg_ids]
        for b in self.bat_ids:
            soc, dis = obs["bats"][b]
            vals += [soc, dis]
        return np.asarray(vals, dtype=float)

    def unwrap_obs(self, vec) -> dict:
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.obs_dim,):
            raise InvalidAction(f"observation vector must have shape ({self.obs_dim},)")
        pairs = self.circuit.bus_phase_pairs()
        pos = len(pairs)
        volt = {key: float(v) for key, v in zip(pairs, vec[:pos])}
        caps = {c: int(vec[pos + i]) for i, c in enumerate(self.cap_ids)}
        pos += len(self.cap_ids)
        regs = {r: int(vec[pos + i]) for i, r in enumerate(self.reg_ids)}
        pos += len(self.reg_ids)
        bats = {}
        for i, b in enumerate(self.bat_ids):
            bats[b] = (float(vec[pos + 2 * i]), float(vec[pos + 2 * i + 1]))
        return {"voltages": volt, "caps": caps, "regs": regs, "bats": bats}

    def solution_residual(self) -> float:
        """Constraint residual of the last solution (diagnostics)."""
        mult = self.profiles.multipliers_at(self._profile_idx, self._i)
        inj = build_injections(self.circuit, mult, self._state, self.config.load_scale)
        return residual(self.circuit, self._state, inj, self._solution)
