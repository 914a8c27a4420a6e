"""Gym-style client for the vvc stdio environment server."""

from .env import PROTOCOL, VVC_BIN_ENV, RemoteEnv, make
from .errors import (AdapterError, ClosedEnv, LaunchError, ProtocolError,
                     RemoteError)
from .spaces import Box, CompositeSpace, Discrete

__version__ = "0.1.0"

__all__ = [
    "AdapterError", "Box", "ClosedEnv", "CompositeSpace", "Discrete",
    "LaunchError", "PROTOCOL", "ProtocolError", "RemoteEnv", "RemoteError",
    "VVC_BIN_ENV", "make",
]
