"""Gym-style environment handle backed by a ``vvc serve-stdio`` subprocess.

One child process per handle; requests are strictly serialized (one in-flight
request at a time).  The wrapper adds no semantics: observations, rewards,
done flags, and info dicts are exactly what the server produced.
"""

from __future__ import annotations

import json
import math
import os
import shlex
import shutil
import subprocess

import numpy as np

from .errors import ClosedEnv, LaunchError, ProtocolError, RemoteError
from .spaces import Box, CompositeSpace, Discrete

PROTOCOL = "vvc/1"
VVC_BIN_ENV = "VVC_BIN"


def _server_command(vvc_bin: str | None) -> list[str]:
    raw = vvc_bin or os.environ.get(VVC_BIN_ENV) or "vvc"
    parts = shlex.split(raw)
    exe = shutil.which(parts[0])
    if exe is None and not os.path.exists(parts[0]):
        raise LaunchError(f"environment server executable {parts[0]!r} not found; "
                          f"pass vvc_bin= or set ${VVC_BIN_ENV}")
    return parts + ["serve-stdio"]


class RemoteEnv:
    """Handle to one remote environment session.

    Not thread-safe: callers must serialize access per handle.  Use as a
    context manager or call :meth:`close` to reap the child process.
    """

    def __init__(self, name: str, worker_idx: int | None = None,
                 vvc_bin: str | None = None, five_tuple: bool = False):
        self.name = name
        self.five_tuple = five_tuple
        self._proc = None
        self._next_id = 0
        self._done = True

        cmd = _server_command(vvc_bin)
        try:
            self._proc = subprocess.Popen(
                cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True)
        except OSError as exc:
            raise LaunchError(f"cannot start {cmd!r}: {exc}") from exc

        made = self._rpc({"op": "make", "env": name, "worker_idx": worker_idx})
        if made.get("protocol") != PROTOCOL:
            self.close()
            raise ProtocolError(f"server speaks {made.get('protocol')!r}, "
                                f"need {PROTOCOL!r}")
        self.obs_dim = int(made["obs_dim"])
        self.action_dim = int(made["action_dim"])

        spaces = self._rpc({"op": "spaces"})
        slots = []
        self.slot_specs = tuple(spaces["action"])
        for slot in spaces["action"]:
            if slot["type"] == "discrete":
                slots.append(Discrete(int(slot["n"])))
            else:
                slots.append(Box(float(slot["low"]), float(slot["high"])))
        self.action_space = CompositeSpace(tuple(slots))
        self.observation_space = Box(-math.inf, math.inf, (self.obs_dim,))

    # -- protocol plumbing ---------------------------------------------------

    def _rpc(self, req: dict) -> dict:
        if self._proc is None or self._proc.poll() is not None:
            raise ClosedEnv("environment handle is closed")
        self._next_id += 1
        req = dict(req, id=self._next_id)
        try:
            self._proc.stdin.write(json.dumps(req) + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise ClosedEnv(f"server process went away: {exc}") from exc
        if not line:
            raise ClosedEnv("server closed the stream")
        try:
            resp = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"unparseable frame: {line!r}") from exc
        if resp.get("id") != self._next_id:
            raise ProtocolError(f"response id {resp.get('id')!r} does not match "
                                f"request id {self._next_id}")
        if "error" in resp:
            err = resp["error"]
            raise RemoteError(str(err.get("code", "Error")), str(err.get("message", "")))
        return resp

    # -- gym surface -----------------------------------------------------------

    def reset(self, profile_idx: int = 0) -> np.ndarray:
        resp = self._rpc({"op": "reset", "profile_idx": profile_idx})
        self._done = False
        return np.asarray(resp["obs"], dtype=float)

    def step(self, action):
        action = [v if isinstance(v, float) else int(v) for v in np.asarray(action).tolist()]
        resp = self._rpc({"op": "step", "action": action})
        obs = np.asarray(resp["obs"], dtype=float)
        reward = float(resp["reward"])
        done = bool(resp["done"])
        info = resp["info"]
        self._done = done
        if self.five_tuple:
            return obs, reward, done, False, info
        return obs, reward, done, info

    def seed(self, value: int):
        self._rpc({"op": "seed", "value": int(value)})

    @property
    def done(self) -> bool:
        return self._done

    def close(self):
        proc, self._proc = self._proc, None
        if proc is None:
            return
        try:
            if proc.poll() is None:
                proc.stdin.write(json.dumps({"op": "close"}) + "\n")
                proc.stdin.flush()
                proc.stdout.readline()
        except (BrokenPipeError, OSError):
            pass
        finally:
            try:
                proc.stdin.close()
            except OSError:
                pass
            proc.terminate()
            proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def make(name: str, worker_idx: int | None = None, *,
         vvc_bin: str | None = None, five_tuple: bool = False) -> RemoteEnv:
    """Launch an environment server and return a ready handle."""
    return RemoteEnv(name, worker_idx, vvc_bin=vvc_bin, five_tuple=five_tuple)
