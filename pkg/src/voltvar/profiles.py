"""Seeded synthetic daily load profiles with scaling and train/test split.

A profile assigns each load key an hourly multiplier curve: a smooth
double-peak daily base shape, jittered per profile/key and per hour, clipped
to [0.2, 1.6] before scaling.  The scale factor is stored separately from the
base multipliers so rescaling composes exactly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidParameter


@dataclass(frozen=True)
class LoadProfileSet:
    keys: tuple[str, ...]
    base: np.ndarray  # (n_profiles, n_keys, horizon), pre-scale multipliers
    scale: float
    seed: int

    @property
    def n_profiles(self) -> int:
        return self.base.shape[0]

    @property
    def horizon(self) -> int:
        return self.base.shape[2]

    def multiplier(self, profile_idx: int, key: str, hour: int) -> float:
        k = self.keys.index(key)
        return float(self.base[profile_idx, k, hour % self.horizon]) * self.scale

    def multipliers_at(self, profile_idx: int, hour: int) -> dict[str, float]:
        row = self.base[profile_idx, :, hour % self.horizon]
        return {key: float(v) * self.scale for key, v in zip(self.keys, row)}


@dataclass(frozen=True)
class ProfileSplit:
    train: tuple[int, ...]
    test: tuple[int, ...]


def generate_profiles(n_profiles: int, horizon: int, keys, seed: int) -> LoadProfileSet:
    """Deterministic in all inputs; regeneration is bit-identical."""
    if n_profiles < 2:
        raise InvalidParameter(f"n_profiles must be >= 2, got {n_profiles}")
    if horizon < 1:
        raise InvalidParameter(f"horizon must be >= 1, got {horizon}")
    keys = tuple(keys)

    rng = np.random.default_rng(seed)
    hours = np.arange(horizon) % 24
    # Morning and evening peaks on a daily cycle.
    shape = (0.55
             + 0.35 * np.exp(-((hours - 8.0) / 3.0) ** 2)
             + 0.55 * np.exp(-((hours - 19.0) / 3.5) ** 2))
    amp = rng.uniform(0.75, 1.25, size=(n_profiles, len(keys), 1))
    noise = rng.uniform(0.9, 1.1, size=(n_profiles, len(keys), horizon))
    base = np.clip(shape[None, None, :] * amp * noise, 0.2, 1.6)
    base.setflags(write=False)
    return LoadProfileSet(keys=keys, base=base, scale=1.0, seed=seed)


def scale_profiles(profile_set: LoadProfileSet, scale: float) -> LoadProfileSet:
    if scale <= 0:
        raise InvalidParameter(f"scale must be > 0, got {scale}")
    return replace(profile_set, scale=profile_set.scale * scale)


def split(profile_set: LoadProfileSet, seed: int) -> ProfileSplit:
    """Seeded permutation halved into train/test (sizes differ by <= 1)."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(profile_set.n_profiles)
    half = (profile_set.n_profiles + 1) // 2
    return ProfileSplit(train=tuple(int(i) for i in perm[:half]),
                        test=tuple(int(i) for i in perm[half:]))


def export_csv(profile_set: LoadProfileSet) -> str:
    """CSV with columns profile,key,hour,multiplier (scale folded in)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["profile", "key", "hour", "multiplier"])
    for i in range(profile_set.n_profiles):
        for k, key in enumerate(profile_set.keys):
            for h in range(profile_set.horizon):
                w.writerow([i, key, h, repr(float(profile_set.base[i, k, h]) * profile_set.scale)])
    return buf.getvalue()


def import_csv(text: str) -> LoadProfileSet:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise InvalidParameter("empty profile CSV")
    profiles = sorted({int(r["profile"]) for r in rows})
    keys = tuple(sorted({r["key"] for r in rows}))
    horizon = max(int(r["hour"]) for r in rows) + 1
    base = np.zeros((len(profiles), len(keys), horizon))
    kidx = {k: i for i, k in enumerate(keys)}
    pidx = {p: i for i, p in enumerate(profiles)}
    for r in rows:
        val = float(r["multiplier"])
        if val < 0:
            raise InvalidParameter(f"negative multiplier in row {r}")
        base[pidx[int(r["profile"])], kidx[r["key"]], int(r["hour"])] = val
    base.setflags(write=False)
    return LoadProfileSet(keys=keys, base=base, scale=1.0, seed=-1)
