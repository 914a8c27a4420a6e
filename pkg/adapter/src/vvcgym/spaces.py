"""Minimal Gym-style space descriptors for the remote action/observation spec."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Discrete:
    n: int

    def contains(self, x) -> bool:
        return float(x) == int(x) and 0 <= int(x) < self.n

    def sample(self, rng: np.random.Generator):
        return int(rng.integers(0, self.n))


@dataclass(frozen=True)
class Box:
    low: float
    high: float
    shape: tuple[int, ...] = ()

    def contains(self, x) -> bool:
        arr = np.asarray(x, dtype=float)
        if self.shape and arr.shape != self.shape:
            return False
        return bool(np.all(arr >= self.low) and np.all(arr <= self.high))

    def sample(self, rng: np.random.Generator):
        out = rng.uniform(self.low, self.high, size=self.shape or None)
        return float(out) if not self.shape else out


@dataclass(frozen=True)
class CompositeSpace:
    """Flat tuple of per-device subspaces, one per action slot."""

    spaces: tuple

    def __len__(self) -> int:
        return len(self.spaces)

    def contains(self, action) -> bool:
        return (len(action) == len(self.spaces)
                and all(s.contains(v) for s, v in zip(self.spaces, action)))

    def sample(self, rng: np.random.Generator):
        return [s.sample(rng) for s in self.spaces]
