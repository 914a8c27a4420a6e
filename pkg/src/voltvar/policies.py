"""Baseline policies: uniform-random and one-step greedy lookahead."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .devices import CONTINUOUS
from .env import VoltVarEnv
from .errors import SingularOperatingPoint


class RandomPolicy:
    """Samples uniformly from the action space with its own seed stream."""

    def __init__(self, seed: int = 0):
        self._seed = seed
        self._rng = np.random.default_rng(seed)

    def start_episode(self, env: VoltVarEnv):
        pass

    def act(self, env: VoltVarEnv, obs):
        out = []
        for slot in env.action_slots():
            if slot.type == "discrete":
                out.append(int(self._rng.integers(0, slot.n)))
            else:
                out.append(float(self._rng.uniform(slot.low, slot.high)))
        return out


@dataclass
class GreedyConfig:
    reg_window: int = 2      # taps swept in {tap-2, ..., tap+2}
    bat_grid: int = 9        # candidate battery powers per sweep


class GreedyPolicy:
    """Coordinate-wise greedy over simulated one-step rewards.

    Starting from the previous action, each device is swept in canonical
    order (caps, regs, bats); for each, the candidate settings are scored via
    env.peek_step with all other coordinates held, and the argmax is kept.
    Ties break toward the smallest change.  Deterministic.
    """

    def __init__(self, config: GreedyConfig | None = None):
        self.config = config or GreedyConfig()
        self._prev_action = None

    def start_episode(self, env: VoltVarEnv):
        state = env.device_state
        action = [state.caps[c].status for c in env.cap_ids]
        action += [state.regs[r].tap for r in env.reg_ids]
        if env.config.bat_mode == CONTINUOUS:
            action += [0.0] * len(env.bat_ids)
        else:
            n = int(env.config.bat_mode)
            action += [(n - 1) // 2] * len(env.bat_ids)  # zero power when N is odd
        self._prev_action = action

    def _candidates(self, env: VoltVarEnv, idx: int, current):
        slot = env.action_slots()[idx]
        if slot.kind == "cap":
            return [0, 1]
        if slot.kind == "reg":
            w = self.config.reg_window
            lo = max(0, int(current) - w)
            hi = min(slot.n - 1, int(current) + w)
            return list(range(lo, hi + 1))
        grid = np.linspace(-1.0, 1.0, self.config.bat_grid)
        if slot.type == "continuous":
            return [float(g) for g in grid]
        ks = sorted({int(round((g + 1.0) / 2.0 * (slot.n - 1))) for g in grid})
        return ks

    def act(self, env: VoltVarEnv, obs):
        action = list(self._prev_action)
        for idx in range(len(action)):
            best_val = action[idx]
            best_reward = None
            for cand in self._candidates(env, idx, action[idx]):
                trial = list(action)
                trial[idx] = cand
                try:
                    reward, _ = env.peek_step(trial)
                except SingularOperatingPoint:
                    continue  # treated as -inf
                change = abs(float(cand) - float(self._prev_action[idx]))
                key = (reward, -change)
                if best_reward is None or key > best_reward:
                    best_reward = key
                    best_val = cand
            action[idx] = best_val
        self._prev_action = action
        return list(action)


def make_policy(name: str, seed: int = 0):
    if name == "random":
        return RandomPolicy(seed)
    if name == "greedy":
        return GreedyPolicy()
    raise ValueError(f"unknown policy {name!r}")
