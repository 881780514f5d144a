"""Exception types raised across the package."""

from __future__ import annotations


class ParameterError(ValueError):
    """Invalid algebra, orbit or potential specification."""


class DomainError(ValueError):
    """A potential was evaluated outside the cone where it is defined."""


class UnsupportedError(ValueError):
    """The operation is not defined for this algebra or orbit."""


class NumericalToleranceError(ArithmeticError):
    """A numerical rank decision could not be made with confidence.

    ``singular_values`` holds the spectrum that was inspected and ``gap`` the
    ratio between the last retained and the first discarded value.
    """

    def __init__(self, message: str, singular_values=None, gap: float | None = None):
        super().__init__(message)
        self.singular_values = singular_values
        self.gap = gap
