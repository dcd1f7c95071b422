"""Static single-period copulas: Student-t (common mixing) and double-t.

The Student-t copula draws one chi-square mixing variable per path shared by
the market factor and all idiosyncratic returns, tying their tails together.
The double-t copula keeps the market and idiosyncratic legs fully independent
Student-t variables, which is what lets the idiosyncratic risk diversify away
in the deep tail and produces an upward-sloping correlation skew.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DomainError
from .kernels import scaled_t_inv, t_scale
from .streams import BLOCK, map_blocks


@dataclass(frozen=True)
class MixingSample:
    """Draws of the common market normal and the shared mixing multiplier.

    ``mixing`` is scaled so that mixing * N(0,1) has unit variance.
    """

    market: np.ndarray
    mixing: np.ndarray


def t_copula_mixing_sample(
    nu: float, n_paths: int, seed: int, n_threads: int = 1
) -> MixingSample:
    if nu <= 2.0:
        raise DomainError(f"t copula mixing requires nu > 2, got {nu}")
    scale = t_scale(nu)

    def block(rng: np.random.Generator, keep: int) -> np.ndarray:
        z = rng.standard_normal(BLOCK)
        chi2 = 2.0 * rng.standard_gamma(0.5 * nu, size=BLOCK)
        w = scale * np.sqrt(nu / chi2)
        return np.column_stack((z, w))[:keep]

    both = map_blocks(seed, n_paths, block, n_threads)
    return MixingSample(market=both[:, 0], mixing=both[:, 1])


def t_copula_conditional_probs(
    sample: MixingSample, nu: float, loading: float, p: float
) -> np.ndarray:
    """Per-path default probability given the mixing variable and market draw.

    The threshold is the exact unit-variance Student-t quantile of p, so the
    probabilities average to p up to Monte Carlo error.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"default probability must be in (0,1), got {p}")
    if not 0.0 <= loading < 1.0:
        raise DomainError(f"loading must be in [0,1), got {loading}")
    d = scaled_t_inv(p, nu)
    s = math.sqrt(1.0 - loading * loading)
    return ndtr((d / sample.mixing - loading * sample.market) / s)


def t_copula_conditional_loss(
    nu: float,
    loading: float,
    recovery: float,
    p: float,
    n_paths: int,
    seed: int,
    n_threads: int = 1,
):
    """LHP loss sample under the Student-t copula."""
    from .factor_mc import LossSample

    sample = t_copula_mixing_sample(nu, n_paths, seed, n_threads=n_threads)
    q = t_copula_conditional_probs(sample, nu, loading, p)
    return LossSample(losses=(1.0 - recovery) * q, recovery=recovery)


def double_t_factor_sample(
    nu_m: float, n_paths: int, seed: int, n_threads: int = 1
):
    """Unit-variance Student-t market-factor draws, normalized like any factor."""
    from .factor_mc import FactorSample

    if nu_m <= 2.0:
        raise DomainError(f"double-t market factor requires nu > 2, got {nu_m}")
    scale = t_scale(nu_m)
    raw = map_blocks(
        seed,
        n_paths,
        lambda rng, keep: (rng.standard_t(nu_m, size=BLOCK) * scale)[:keep],
        n_threads,
    )
    sd = float(raw.std())
    if sd == 0.0:
        raise DomainError("degenerate factor sample: zero variance")
    return FactorSample(values=raw / sd, model_id=f"double_t({nu_m:g})")
