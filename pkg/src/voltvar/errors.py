"""Exception types shared across the package."""


class VoltVarError(Exception):
    """Base class for all package errors."""


class CircuitSyntaxError(VoltVarError):
    """Circuit file is structurally malformed (bad JSON or schema violation)."""

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(message if path is None else f"{message} (at {path})")


class ValidationError(VoltVarError):
    """Circuit is structurally well-formed but violates a model invariant."""

    def __init__(self, message, element_id=None):
        self.element_id = element_id
        super().__init__(message)


class InvalidParameter(VoltVarError):
    pass


class SingularOperatingPoint(VoltVarError):
    """Voltage collapsed below the solvable region during iteration."""


class DimensionMismatch(VoltVarError):
    pass


class TapOutOfRange(VoltVarError):
    pass


class ActionOutOfRange(VoltVarError):
    pass


class UnknownProfile(VoltVarError):
    pass


class EpisodeOver(VoltVarError):
    pass


class InvalidAction(VoltVarError):
    pass


class UnknownSystem(VoltVarError):
    pass


class MalformedScale(VoltVarError):
    pass


class DuplicateName(VoltVarError):
    pass


class InvalidSpec(VoltVarError):
    pass


class CircuitLoadError(VoltVarError):
    pass


class KeyMismatch(VoltVarError):
    pass
