"""Semantic exceptions shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class NoBracketError(DomainError):
    """Root finding was asked to search an interval that does not bracket a zero."""


class InfiniteMomentError(DomainError):
    """A requested distribution moment does not exist (e.g. Student-t kurtosis, nu <= 4)."""


class TargetOutOfRangeError(DomainError):
    """An expected-loss target lies outside the attainable Gaussian-copula range.

    ``bound`` is ``"independence"`` (upper, rho -> 0) or ``"comonotone"``
    (lower, rho -> 1).
    """

    def __init__(self, message: str, bound: str):
        super().__init__(message)
        self.bound = bound


class ConfigError(ValueError):
    """Invalid run configuration (CLI exit code 2)."""
