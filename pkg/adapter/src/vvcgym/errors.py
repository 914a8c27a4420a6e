class AdapterError(Exception):
    """Base class for adapter-side failures."""


class LaunchError(AdapterError):
    """The environment server executable could not be started."""


class ProtocolError(AdapterError):
    """The server spoke an unexpected protocol version or malformed frame."""


class ClosedEnv(AdapterError):
    """The handle is closed or the server process exited."""


class RemoteError(AdapterError):
    """The server answered with an error frame; ``code`` names the cause."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
