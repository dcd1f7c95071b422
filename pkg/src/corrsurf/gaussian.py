"""Closed-form Gaussian-copula large-portfolio loss analytics.

Everything is expressed per unit of portfolio notional for a homogeneous
portfolio with common default probability ``p``, recovery ``recovery`` and
pairwise latent correlation ``rho``.  Loss is capped at ``1 - recovery``
almost surely, so equity-tranche formulas switch to the linear branch
``(1 - recovery) * p`` once the detachment exceeds that cap.
"""
from __future__ import annotations

import math

from .errors import DomainError
from .kernels import (
    binorm_cdf,
    binorm_pdf,
    norm_cdf,
    norm_inv_cdf,
    norm_pdf,
)


def tranche_payoff(loss: float, k_down: float, k_up: float) -> float:
    """Loss absorbed by the (k_down, k_up] tranche: (x-Kd)+ - (x-Ku)+."""
    if not 0.0 <= k_down < k_up <= 1.0:
        raise DomainError(f"need 0 <= k_down < k_up <= 1, got ({k_down}, {k_up})")
    return max(loss - k_down, 0.0) - max(loss - k_up, 0.0)


def _check_core(p: float, recovery: float, rho: float) -> None:
    if not 0.0 < p < 1.0:
        raise DomainError(f"default probability must be in (0,1), got {p}")
    if not 0.0 <= recovery < 1.0:
        raise DomainError(f"recovery must be in [0,1), got {recovery}")
    if not 0.0 < rho < 1.0:
        raise DomainError(f"correlation must be in (0,1), got {rho}")


def vasicek_d1(k: float, p: float, recovery: float, rho: float) -> float:
    """Factor threshold pairing detachment k with the loss cdf / tranche formulas."""
    _check_core(p, recovery, rho)
    lgd = 1.0 - recovery
    if not 0.0 < k < lgd:
        raise DomainError(f"detachment must be in (0, {lgd}), got {k}")
    sq = math.sqrt(rho)
    return norm_inv_cdf(p) / sq - math.sqrt(1.0 - rho) / sq * norm_inv_cdf(k / lgd)


def vasicek_loss_cdf(loss: float, p: float, recovery: float, rho: float) -> float:
    """P(L <= loss) for the Gaussian-factor large homogeneous portfolio."""
    return 1.0 - norm_cdf(vasicek_d1(loss, p, recovery, rho))


def expected_equity_loss(k: float, p: float, recovery: float, rho: float) -> float:
    """Expected loss of the equity tranche (0, k] under the Gaussian copula."""
    _check_core(p, recovery, rho)
    lgd = 1.0 - recovery
    if k <= 0.0 or k > 1.0:
        raise DomainError(f"detachment must be in (0,1], got {k}")
    if k >= lgd:
        return lgd * p
    d1 = vasicek_d1(k, p, recovery, rho)
    return lgd * binorm_cdf(norm_inv_cdf(p), -d1, -math.sqrt(rho)) + k * norm_cdf(d1)


def expected_tranche_loss(
    k_down: float, k_up: float, p: float, recovery: float, rho: float
) -> float:
    """Expected loss of (k_down, k_up], the difference of two equity tranches."""
    lower = expected_equity_loss(k_down, p, recovery, rho) if k_down > 0.0 else 0.0
    return expected_equity_loss(k_up, p, recovery, rho) - lower


def expected_equity_loss_drho(k: float, p: float, recovery: float, rho: float) -> float:
    """d/drho of the equity-tranche expected loss; strictly negative inside the cap."""
    _check_core(p, recovery, rho)
    lgd = 1.0 - recovery
    if k >= lgd:
        return 0.0
    d1 = vasicek_d1(k, p, recovery, rho)
    sq = math.sqrt(rho)
    return -lgd / (2.0 * sq) * binorm_pdf(norm_inv_cdf(p), -d1, -sq)


def expected_equity_loss_dk(k: float, p: float, recovery: float, rho: float) -> float:
    """d/dK of the equity-tranche expected loss, which equals Phi(d1)."""
    _check_core(p, recovery, rho)
    if k >= 1.0 - recovery:
        return 0.0
    return norm_cdf(vasicek_d1(k, p, recovery, rho))


def expected_equity_loss_dp(k: float, p: float, recovery: float, rho: float) -> float:
    """d/dp of the equity-tranche expected loss."""
    _check_core(p, recovery, rho)
    lgd = 1.0 - recovery
    if k >= lgd:
        return lgd
    d1 = vasicek_d1(k, p, recovery, rho)
    arg = (-d1 + math.sqrt(rho) * norm_inv_cdf(p)) / math.sqrt(1.0 - rho)
    return lgd * norm_cdf(arg)


def hazard_to_p(h: float, t: float, discrete: bool = False) -> float:
    """Cumulative default probability from a flat hazard rate over t years.

    Continuous compounding by default; ``discrete=True`` uses the annual
    compounding convention 1 - (1-h)^t.
    """
    if h < 0.0 or t <= 0.0:
        raise DomainError(f"need h >= 0 and t > 0, got h={h}, t={t}")
    if discrete:
        if h >= 1.0:
            raise DomainError("discrete hazard must be < 1")
        return 1.0 - (1.0 - h) ** t
    return -math.expm1(-h * t)


def expected_equity_loss_dh(
    k: float, p_t: float, recovery: float, rho: float, t: float, h: float
) -> float:
    """d/dh of the equity-tranche expected loss with p_t = 1 - exp(-h t)."""
    if t <= 0.0:
        raise DomainError(f"horizon must be positive, got {t}")
    dp_dh = (1.0 - p_t) * t
    return dp_dh * expected_equity_loss_dp(k, p_t, recovery, rho)


def loss_variance(p: float, recovery: float, rho_d: float) -> float:
    """Variance of the portfolio loss from the pairwise default correlation."""
    if not 0.0 <= rho_d <= 1.0:
        raise DomainError(f"default correlation must be in [0,1], got {rho_d}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"default probability must be in (0,1), got {p}")
    return (1.0 - recovery) ** 2 * p * (1.0 - p) * rho_d


def gaussian_default_corr(p: float, rho: float) -> float:
    """Pairwise default-indicator correlation under the Gaussian copula."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"default probability must be in (0,1), got {p}")
    if rho == 0.0:
        return 0.0
    d = norm_inv_cdf(p)
    return (binorm_cdf(d, d, rho) - p * p) / (p * (1.0 - p))
