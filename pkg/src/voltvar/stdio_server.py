"""Newline-delimited JSON session protocol ("vvc/1") over stdin/stdout.

One environment per session.  Every request may carry an "id", which the
response echoes.  Errors come back as {"error": {"code", "message"}} with the
code naming the error class; the session survives request errors and ends on
"close", EOF, or unreadable input.
"""

from __future__ import annotations

import json
import sys

from .errors import VoltVarError
from .registry import make_env

PROTOCOL = "vvc/1"


def _slot_doc(slot) -> dict:
    doc = {"kind": slot.kind, "device_id": slot.device_id, "type": slot.type}
    if slot.type == "discrete":
        doc["n"] = slot.n
    else:
        doc["low"] = slot.low
        doc["high"] = slot.high
    return doc


class Session:
    def __init__(self):
        self.env = None

    def handle(self, req: dict) -> dict:
        op = req.get("op")
        if op == "make":
            self.env = make_env(req["env"], req.get("worker_idx"))
            return {"protocol": PROTOCOL, "env": req["env"],
                    "obs_dim": self.env.obs_dim, "action_dim": self.env.action_dim}
        if self.env is None:
            raise VoltVarError("no environment; send a 'make' request first")
        if op == "spaces":
            return {"obs_dim": self.env.obs_dim,
                    "action": [_slot_doc(s) for s in self.env.action_slots()]}
        if op == "seed":
            self.env.seed(int(req["value"]))
            return {"seeded": int(req["value"])}
        if op == "reset":
            obs = self.env.reset(int(req.get("profile_idx", 0)))
            return {"obs": [float(v) for v in obs]}
        if op == "step":
            obs, reward, done, info = self.env.step(req["action"])
            return {"obs": [float(v) for v in obs], "reward": float(reward),
                    "done": bool(done), "info": info}
        if op == "close":
            self.env = None
            return {"closed": True}
        raise VoltVarError(f"unknown op {op!r}")


def serve(stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = Session()
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        req_id = None
        try:
            req = json.loads(line)
            req_id = req.get("id")
            resp = session.handle(req)
            resp["id"] = req_id
            closing = req.get("op") == "close"
        except VoltVarError as exc:
            resp = {"id": req_id,
                    "error": {"code": type(exc).__name__, "message": str(exc)}}
            closing = False
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            resp = {"id": req_id,
                    "error": {"code": "BadRequest", "message": str(exc)}}
            closing = False
        stdout.write(json.dumps(resp) + "\n")
        stdout.flush()
        if closing:
            return 0
    return 0
