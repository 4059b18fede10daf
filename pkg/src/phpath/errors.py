"""Exception types shared across the package."""


class PhPathError(Exception):
    """Base class for all package errors."""


class DegenerateInput(PhPathError, ValueError):
    """Input data is degenerate (zero tangent, coincident points, ...)."""


class SingularMapping(PhPathError, ValueError):
    """The actuation mapping is singular (head offset on the rotation axis)."""


class InvalidSpline(PhPathError, ValueError):
    """A constructed spline violates a structural requirement (e.g. sigma <= 0)."""


class ConfigError(PhPathError, ValueError):
    """A scenario or model configuration is invalid."""


class SimulationDiverged(PhPathError, RuntimeError):
    """The integrator produced NaN/Inf state."""

    def __init__(self, message, t=None, trace=None):
        super().__init__(message)
        self.t = t
        self.trace = trace
