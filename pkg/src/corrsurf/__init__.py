"""Dynamic factor credit-loss models and Gaussian-copula correlation surfaces.

Subpackages follow the pipeline: ``kernels`` (probability primitives),
``tarch`` (volatility dynamics and moment term structures), ``estimation``
(maximum likelihood), ``gaussian`` (closed-form copula analytics),
``factor_mc`` / ``static_copulas`` (Monte Carlo loss generation), ``surface``
(correlation-surface transform and delta adjustments), ``cli`` (front end).
"""

from . import (
    cli,
    estimation,
    factor_mc,
    gaussian,
    kernels,
    static_copulas,
    streams,
    surface,
    tarch,
)
from .errors import (
    ConfigError,
    DomainError,
    InfiniteMomentError,
    NoBracketError,
    TargetOutOfRangeError,
)

__all__ = [
    "cli",
    "estimation",
    "factor_mc",
    "gaussian",
    "kernels",
    "static_copulas",
    "streams",
    "surface",
    "tarch",
    "ConfigError",
    "DomainError",
    "InfiniteMomentError",
    "NoBracketError",
    "TargetOutOfRangeError",
]

__version__ = "0.1.0"
