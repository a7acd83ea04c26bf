"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class SwarmError(Exception):
    """Base class for all errors raised by friendswarm."""


class DegenerateStateError(SwarmError):
    """Two agents coincide or collapsed below the minimum separation."""

    def __init__(self, message: str, step: int | None = None):
        if step is not None:
            message = f"{message} (at step {step})"
        super().__init__(message)
        self.step = step


class DimensionError(SwarmError, ValueError):
    pass


class NoEquilibriumError(SwarmError, ValueError):
    pass


class InconsistentCommandError(SwarmError, ValueError):
    """Motor outputs that no planar velocity can produce."""


class TrajectoryError(SwarmError, ValueError):
    """Trajectory is empty, malformed or too short for the requested analysis."""


class ConfigError(SwarmError, ValueError):
    """Invalid configuration document.

    ``key`` names the offending entry (dotted path) when known and ``line``
    carries the 1-based line number for syntax errors.
    """

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        prefix = ""
        if key:
            prefix = f"{key}: "
        if line is not None:
            prefix = f"line {line}: " + prefix
        super().__init__(prefix + message)
        self.key = key
        self.line = line
