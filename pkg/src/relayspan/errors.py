"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "RelaySpanError",
    "DomainError",
    "DegenerateBacklogError",
    "ConfigError",
    "SimulationGuardError",
]


class RelaySpanError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RelaySpanError, ValueError):
    """An input value lies outside the mathematical domain of an operation."""


class DegenerateBacklogError(DomainError):
    """Both backlogs are zero, so no direction for the traffic ray exists."""


class ConfigError(RelaySpanError, ValueError):
    """A configuration file or mapping is malformed or inconsistent."""


class SimulationGuardError(RelaySpanError, RuntimeError):
    """A simulation exceeded its slot budget without terminating."""
