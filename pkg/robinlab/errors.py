"""
errors.py – exception hierarchy for robinlab.

Every error raised on purpose by the library derives from RobinLabError so the
CLI can map it to an exit code:

  ValidationError   – precondition violated before any computation (exit 2)
  SolverError       – a solve was attempted and failed (exit 1)
"""

from __future__ import annotations

from typing import Any


class RobinLabError(Exception):
    """Base class for all robinlab errors."""

    def to_dict(self) -> dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self)}


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

class ValidationError(RobinLabError, ValueError):
    """A parameter or input violates a documented precondition."""


class GeometryError(ValidationError):
    """Degenerate domain or unsupported domain variant."""


class CurvatureUndefinedError(GeometryError):
    """Mean curvature is not defined for the requested domain."""


class ConfigError(ValidationError):
    """Unknown key, malformed value, or unreadable field file."""


# ---------------------------------------------------------------------------
# Solver failures
# ---------------------------------------------------------------------------

class SolverError(RobinLabError, RuntimeError):
    """A numerical solve did not produce a valid result."""


class BracketError(SolverError):
    """No sign change of the shooting mismatch inside the scanned window."""

    def __init__(self, message: str, window: tuple[float, float]):
        super().__init__(f"{message} (scanned lambda window [{window[0]:.6g}, {window[1]:.6g}])")
        self.window = window

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data["window"] = list(self.window)
        return data


class ConvergenceError(SolverError):
    """Descent hit its iteration limit; carries the best iterate found."""

    def __init__(self, message: str, best: Any, quotient: float, gradient_norm: float):
        super().__init__(message)
        self.best = best
        self.quotient = quotient
        self.gradient_norm = gradient_norm

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data["quotient"] = self.quotient
        data["gradient_norm"] = self.gradient_norm
        return data


class ZeroDenominatorError(SolverError):
    """The discrete L^p(Omega) norm of the trial field vanished."""


class IncompleteStencilError(RobinLabError):
    """A finite-difference stencil would leave the grid."""
