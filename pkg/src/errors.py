"""
Exception hierarchy for relaycap.

The CLI maps ConfigError to exit code 2 and NumericError to exit code 3.
"""

from typing import Optional


class RelayCapError(Exception):
    """Base class for all relaycap errors."""


# ============================================================================
# CONFIGURATION ERRORS (exit code 2)
# ============================================================================

class ConfigError(RelayCapError, ValueError):
    """A configuration key is missing, unknown, or out of range."""

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        if key:
            message = f"{key}: {message}"
        super().__init__(message)


class GeometryError(ConfigError):
    """The network geometry violates a dead-zone or region constraint."""


# ============================================================================
# NUMERIC ERRORS (exit code 3)
# ============================================================================

class NumericError(RelayCapError, ArithmeticError):
    """A numerical procedure failed."""


class QuadratureError(NumericError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, achieved_tolerance: float):
        self.achieved_tolerance = achieved_tolerance
        super().__init__(f"{message} (achieved relative tolerance {achieved_tolerance:.3e})")


class RootFindingError(NumericError):
    """A bracketing root search could not bracket the root."""


class DomainError(NumericError, ValueError):
    """A quantity was requested outside the domain where it is defined."""
