"""Exception types shared across the solver layers."""
from __future__ import annotations


class NlclawError(Exception):
    """Base class for all package errors."""


class ConfigError(NlclawError):
    """Raised when a run configuration cannot be parsed or is inconsistent."""


class ValidationError(NlclawError):
    """Raised when scenario preconditions are violated.

    Carries the list of violation codes so callers can report every failed
    assumption at once.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"{v.code}: {v.message}" for v in self.violations)
        super().__init__(f"scenario validation failed: {lines}")


class CflError(NlclawError):
    """Raised when a requested time step violates the stability condition.

    ``admissible_dt`` is the largest step the current coefficient allows.
    """

    def __init__(self, message, admissible_dt):
        super().__init__(message)
        self.admissible_dt = admissible_dt


class ResolutionError(NlclawError):
    """Raised when the mesh is too coarse for the frozen coefficient."""


class SolverError(NlclawError):
    """Raised when a solve cannot continue (support hit the boundary, ...)."""


class MonitorViolation(NlclawError):
    """Raised by callers that choose to escalate a failed monitor report."""
