"""Episode evaluation: run a policy for K episodes, report return statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import profiles as profiles_mod
from .env import VoltVarEnv

SPLIT_SEED = 7  # fixed so the train/test partition is stable per profile set

COMPONENT_KEYS = ("f_volt", "f_power", "cap_error", "reg_error",
                  "dis_error", "soc_error")


@dataclass
class EvaluationConfig:
    episodes: int = 20
    seed: int = 0
    split: str = "test"          # "train" | "test" | "all"
    gamma: float = 1.0

    def __post_init__(self):
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        if self.split not in ("train", "test", "all"):
            raise ValueError(f"bad split {self.split!r}")


@dataclass
class StepRecord:
    episode: int
    step: int
    reward: float
    info: dict


@dataclass
class EvalReport:
    episode_returns: list[float]
    mean: float
    std: float
    component_means: dict[str, float]
    episodes: int
    seed: int
    steps: list[StepRecord] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {
            "episode_returns": self.episode_returns,
            "mean": self.mean,
            "std": self.std,
            "component_means": self.component_means,
            "episodes": self.episodes,
            "seed": self.seed,
        }


def profile_order(env: VoltVarEnv, cfg: EvaluationConfig) -> list[int]:
    if cfg.split == "all":
        return list(range(env.profiles.n_profiles))
    sp = profiles_mod.split(env.profiles, SPLIT_SEED)
    return list(sp.train if cfg.split == "train" else sp.test)


def evaluate(policy, env: VoltVarEnv, cfg: EvaluationConfig) -> EvalReport:
    """Run cfg.episodes episodes cycling the selected profile indices.

    The return of an episode is sum_i gamma^i r_i.  Deterministic given the
    policy's seed and cfg.seed.
    """
    order = profile_order(env, cfg)
    env.seed(cfg.seed)

    returns = []
    steps: list[StepRecord] = []
    comp_sums = {k: 0.0 for k in COMPONENT_KEYS}
    n_steps = 0
    for ep in range(cfg.episodes):
        obs = env.reset(order[ep % len(order)])
        policy.start_episode(env)
        ret = 0.0
        discount = 1.0
        i = 0
        done = False
        while not done:
            action = policy.act(env, obs)
            obs, reward, done, info = env.step(action)
            ret += discount * reward
            discount *= cfg.gamma
            steps.append(StepRecord(ep, i, reward, info))
            for k in COMPONENT_KEYS:
                comp_sums[k] += info[k]
            n_steps += 1
            i += 1
        returns.append(ret)

    arr = np.asarray(returns)
    return EvalReport(
        episode_returns=returns,
        mean=float(arr.mean()),
        std=float(arr.std()),
        component_means={k: v / n_steps for k, v in comp_sums.items()},
        episodes=cfg.episodes,
        seed=cfg.seed,
        steps=steps,
    )
