"""Exception hierarchy shared by all phasevol modules."""

from __future__ import annotations

from typing import Any


class PhasevolError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(PhasevolError):
    """A numerical routine failed to deliver a result within its contract."""


class ConvergenceError(NumericalError):
    """Adaptive routine hit its iteration cap.

    The best available result is kept on ``partial`` so callers can inspect
    how far the computation got.
    """

    def __init__(self, message: str, partial: Any = None):
        super().__init__(message)
        self.partial = partial


class BracketError(NumericalError):
    """The supplied interval does not bracket a sign change."""


class ConfigurationError(PhasevolError):
    """An object lacks the data needed for the requested computation."""


class SpecParseError(PhasevolError, ValueError):
    """A symbol spec string or CLI grid could not be parsed."""

    def __init__(self, message: str, token: str | None = None):
        super().__init__(message)
        self.token = token


class DomainError(PhasevolError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""
