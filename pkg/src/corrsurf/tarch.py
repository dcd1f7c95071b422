"""Threshold-asymmetric GARCH(1,1) process: simulation and moment term structures.

The return process is

    r_t = sigma_t * eps_t
    sigma_t^2 = omega + alpha * r_{t-1}^2 + alpha_d * r_{t-1}^2 * 1{r_{t-1} <= 0}
                + beta * sigma_{t-1}^2

with iid unit-variance shocks eps_t (Gaussian, or Student-t rescaled to unit
variance).  alpha_d = 0 recovers plain GARCH(1,1).  Closed-form results cover
the persistence factor, the leverage correlation, the kurtosis of single-period
returns, and the skewness/kurtosis term structures of time-aggregated returns;
quantities without a closed form (the stationary third moment of volatility,
the squared-return moments of the asymmetric model) are estimated by
simulation.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.special import gamma as gamma_fn

from .errors import DomainError, InfiniteMomentError
from .kernels import t_scale
from .streams import BLOCK, block_ranges, block_rng

_GAUSS_TRUNC_THIRD = -math.sqrt(2.0 / math.pi)  # E[eps^3 1{eps<=0}], standard normal


@dataclass(frozen=True)
class TarchParams:
    """Volatility-process coefficients and shock-distribution choice.

    ``nu is None`` selects Gaussian shocks; otherwise shocks are Student-t
    with ``nu`` degrees of freedom, rescaled to unit variance.
    """

    omega: float
    alpha: float
    alpha_d: float
    beta: float
    nu: float | None = None

    def __post_init__(self):
        if self.omega < 0.0 or self.alpha < 0.0 or self.alpha_d < 0.0 or self.beta < 0.0:
            raise DomainError("omega, alpha, alpha_d, beta must be non-negative")
        if self.nu is not None and self.nu <= 2.0:
            raise DomainError(f"Student-t shocks require nu > 2, got {self.nu}")

    @classmethod
    def garch(cls, omega: float, alpha: float, beta: float, nu: float | None = None):
        return cls(omega=omega, alpha=alpha, alpha_d=0.0, beta=beta, nu=nu)

    @classmethod
    def normalized(cls, alpha: float, alpha_d: float, beta: float, nu: float | None = None):
        """Coefficients with omega set so the unconditional variance is 1."""
        zeta = beta + alpha + 0.5 * alpha_d
        if zeta >= 1.0:
            raise DomainError(f"persistence {zeta} >= 1: no stationary variance")
        return cls(omega=1.0 - zeta, alpha=alpha, alpha_d=alpha_d, beta=beta, nu=nu)


@dataclass(frozen=True)
class InnovationMoments:
    """Central and left-truncated moments of the unit-variance shock."""

    v_d: float  # E[eps^2 1{eps<=0}]
    s: float    # E[eps^3]
    s_d: float  # E[eps^3 1{eps<=0}]
    k: float    # E[eps^4]
    k_d: float  # E[eps^4 1{eps<=0}]


@dataclass(frozen=True)
class PathConfig:
    horizon_steps: int
    n_paths: int
    seed: int
    initial_variance: float | None = None  # None -> unconditional level
    burn_in: int = 0

    def __post_init__(self):
        if self.horizon_steps < 1 or self.n_paths < 1:
            raise DomainError("horizon_steps and n_paths must be >= 1")
        if self.burn_in < 0:
            raise DomainError("burn_in must be >= 0")


def innovation_moments(nu: float | None = None) -> InnovationMoments:
    """Moments of the shock distribution (Gaussian, or unit-variance Student-t)."""
    if nu is None:
        return InnovationMoments(v_d=0.5, s=0.0, s_d=_GAUSS_TRUNC_THIRD, k=3.0, k_d=1.5)
    if nu <= 4.0:
        raise InfiniteMomentError(
            f"Student-t kurtosis requires nu > 4, got {nu}"
        )
    k = 3.0 * (nu - 2.0) / (nu - 4.0)
    # E|T|^3 = nu^{3/2} Gamma(2) Gamma((nu-3)/2) / (sqrt(pi) Gamma(nu/2))
    abs_third = nu ** 1.5 * gamma_fn((nu - 3.0) / 2.0) / (math.sqrt(math.pi) * gamma_fn(nu / 2.0))
    s_d = -0.5 * t_scale(nu) ** 3 * abs_third
    return InnovationMoments(v_d=0.5, s=0.0, s_d=s_d, k=k, k_d=0.5 * k)


def persistence(params: TarchParams) -> float:
    """Mean of the one-step variance multiplier; < 1 gives mean reversion."""
    m = innovation_moments(params.nu) if params.alpha_d else None
    v_d = m.v_d if m is not None else 0.5
    return params.beta + params.alpha + params.alpha_d * v_d


def persistence_second_moment(params: TarchParams) -> float:
    """Second moment of the one-step variance multiplier; < 1 for finite kurtosis."""
    m = innovation_moments(params.nu)
    a, ad, b = params.alpha, params.alpha_d, params.beta
    return (
        b * b
        + a * a * m.k
        + ad * ad * m.k_d
        + 2.0 * a * b
        + 2.0 * ad * b * m.v_d
        + 2.0 * a * ad * m.k_d
    )


def leverage_correlation(params: TarchParams) -> float:
    """Correlation of a return shock with the next-period variance shock."""
    m = innovation_moments(params.nu)
    zeta = persistence(params)
    xi = persistence_second_moment(params)
    var_eta = xi - zeta * zeta
    if var_eta <= 0.0:
        raise DomainError("variance multiplier is degenerate (xi == zeta^2)")
    return (params.alpha * m.s + params.alpha_d * m.s_d) / math.sqrt(var_eta)


def unconditional_variance(params: TarchParams) -> float:
    zeta = persistence(params)
    if zeta >= 1.0:
        raise DomainError(f"persistence {zeta} >= 1: no stationary variance")
    return params.omega / (1.0 - zeta)


def _shock_drawer(params: TarchParams) -> Callable[[np.random.Generator], np.ndarray]:
    if params.nu is None:
        return lambda rng: rng.standard_normal(BLOCK)
    nu, scale = params.nu, t_scale(params.nu)
    return lambda rng: rng.standard_t(nu, size=BLOCK) * scale


def _initial_variance(params: TarchParams, config: PathConfig) -> float:
    if config.initial_variance is not None:
        if config.initial_variance <= 0.0:
            raise DomainError("initial_variance must be positive")
        return config.initial_variance
    return unconditional_variance(params)


def fold_paths(
    params: TarchParams,
    config: PathConfig,
    block_fold: Callable[[np.ndarray], np.ndarray],
    n_threads: int = 1,
) -> np.ndarray:
    """Simulate per block and reduce each block of returns with ``block_fold``.

    ``block_fold`` maps a (rows, horizon) return block to an array whose axis 0
    indexes paths; blocks are concatenated in ascending order, so results are
    bit-identical for any ``n_threads``.  Shocks are drawn one full-width block
    vector per time step, which makes every path a pure function of
    (seed, path index) independent of the total path count.
    """
    if params.omega <= 0.0:
        raise DomainError("simulation requires omega > 0")
    sig2_init = _initial_variance(params, config)
    draw = _shock_drawer(params)
    a, ad, b, om = params.alpha, params.alpha_d, params.beta, params.omega
    T = config.horizon_steps

    def run_block(rng: np.random.Generator, keep: int) -> np.ndarray:
        sig2 = np.full(BLOCK, sig2_init)
        for _ in range(config.burn_in):
            e = draw(rng)
            sig2 = om + sig2 * (b + (a + ad * (e <= 0.0)) * e * e)
        rets = np.empty((keep, T))
        for t in range(T):
            e = draw(rng)
            rets[:, t] = (np.sqrt(sig2) * e)[:keep]
            sig2 = om + sig2 * (b + (a + ad * (e <= 0.0)) * e * e)
        return block_fold(rets)

    if n_threads <= 1:
        parts = [
            run_block(block_rng(config.seed, bi), keep)
            for bi, _, keep in block_ranges(config.n_paths)
        ]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            parts = list(
                pool.map(
                    lambda r: run_block(block_rng(config.seed, r[0]), r[2]),
                    block_ranges(config.n_paths),
                )
            )
    return np.concatenate(parts, axis=0)


def simulate_paths(params: TarchParams, config: PathConfig, n_threads: int = 1) -> np.ndarray:
    """Return matrix of simulated returns, shape (n_paths, horizon_steps)."""
    return fold_paths(params, config, lambda rets: rets, n_threads=n_threads)


def simulate_variance_paths(params: TarchParams, config: PathConfig) -> np.ndarray:
    """Conditional variance paths sigma_t^2, t = 1..horizon, shape (n_paths, horizon)."""
    if params.omega <= 0.0:
        raise DomainError("simulation requires omega > 0")
    sig2_init = _initial_variance(params, config)
    draw = _shock_drawer(params)
    a, ad, b, om = params.alpha, params.alpha_d, params.beta, params.omega
    T = config.horizon_steps
    parts = []
    for bi, _, keep in block_ranges(config.n_paths):
        rng = block_rng(config.seed, bi)
        sig2 = np.full(BLOCK, sig2_init)
        for _ in range(config.burn_in):
            e = draw(rng)
            sig2 = om + sig2 * (b + (a + ad * (e <= 0.0)) * e * e)
        out = np.empty((keep, T))
        for t in range(T):
            out[:, t] = sig2[:keep]
            e = draw(rng)
            sig2 = om + sig2 * (b + (a + ad * (e <= 0.0)) * e * e)
        parts.append(out)
    return np.concatenate(parts, axis=0)


def conditional_aggregate_variance(
    params: TarchParams, sigma2_next: float, horizon: int
) -> float:
    """Conditional variance of the aggregated return over ``horizon`` steps."""
    zeta = persistence(params)
    s2 = unconditional_variance(params)
    T = float(horizon)
    if zeta == 0.0:
        weight = 1.0 / T
    else:
        weight = (1.0 - zeta ** T) / (1.0 - zeta) / T
    return T * (s2 + (sigma2_next - s2) * weight)


def _geo_ramp(zeta: float, horizon: int) -> float:
    """(T(1-zeta) - 1 + zeta^T) / (1-zeta)^2, the ramped geometric sum."""
    T = float(horizon)
    return (T * (1.0 - zeta) - 1.0 + zeta ** T) / (1.0 - zeta) ** 2


def aggregated_skewness(params: TarchParams, horizon: int, sigma3_ratio: float) -> float:
    """Unconditional skewness of the ``horizon``-step aggregated return.

    ``sigma3_ratio`` is E[(sigma_t / sigma)^3] over the stationary law, which
    has no closed form; estimate it with :func:`stationary_sigma3_ratio`.
    """
    m = innovation_moments(params.nu)
    zeta = persistence(params)
    if zeta >= 1.0:
        raise DomainError("aggregated skewness requires persistence < 1")
    T = float(horizon)
    lever = params.alpha * m.s + params.alpha_d * m.s_d
    return (m.s / math.sqrt(T) + 3.0 * lever * _geo_ramp(zeta, horizon) / T ** 1.5) * sigma3_ratio


def conditional_third_moment(
    params: TarchParams, sigma3_forecast: np.ndarray, horizon: int | None = None
) -> float:
    """Conditional third moment of the aggregated return.

    ``sigma3_forecast`` holds E_t[sigma_{t+u}^3] for u = 1..T (simulated).
    """
    fc = np.asarray(sigma3_forecast, dtype=float)
    T = len(fc) if horizon is None else horizon
    if len(fc) != T:
        raise DomainError(f"forecast series has length {len(fc)}, expected {T}")
    m = innovation_moments(params.nu)
    zeta = persistence(params)
    u = np.arange(1, T + 1)
    weights = (1.0 - zeta ** (T - u).astype(float)) / (1.0 - zeta) if zeta != 1.0 else (T - u).astype(float)
    lever = params.alpha * m.s + params.alpha_d * m.s_d
    return float(m.s * fc.sum() + 3.0 * lever * np.sum(weights * fc))


def single_period_kurtosis(params: TarchParams) -> float:
    """Unconditional kurtosis of one-step returns, k_eps (1 - zeta^2)/(1 - xi)."""
    m = innovation_moments(params.nu)
    zeta = persistence(params)
    xi = persistence_second_moment(params)
    if xi >= 1.0:
        raise InfiniteMomentError(f"xi = {xi} >= 1: fourth moment does not exist")
    return m.k * (1.0 - zeta * zeta) / (1.0 - xi)


@dataclass(frozen=True)
class SquaredReturnMoments:
    """Standardized moments of stationary returns entering the lag-1 autocovariance."""

    k_r: float    # E r^4 / (E r^2)^2
    k_r_d: float  # E[r^4 1{r<=0}] / (E r^2)^2
    v_r_d: float  # E[r^2 1{r<=0}] / E r^2


def squared_return_autocov(
    params: TarchParams, r_moments: SquaredReturnMoments | None = None
) -> float:
    """Lag-1 autocovariance of squared returns in units of sigma^4.

    cov(r_{t-1}^2, r_t^2)/sigma^4
        = alpha (k_r - 1) + alpha_d (k_r^d - v_r^d) + beta (k_r / k_eps - 1).

    Without ``r_moments`` the symmetric-GARCH closed form is used
    (k_r = K_1, v_r^d = 1/2, k_r^d = K_1 / 2); the asymmetric model needs
    simulated moments.
    """
    m = innovation_moments(params.nu)
    if r_moments is None:
        if params.alpha_d != 0.0:
            raise DomainError(
                "closed-form squared-return moments require alpha_d = 0; "
                "pass simulated r_moments for the asymmetric model"
            )
        k1 = single_period_kurtosis(params)
        r_moments = SquaredReturnMoments(k_r=k1, k_r_d=0.5 * k1, v_r_d=0.5)
    return (
        params.alpha * (r_moments.k_r - 1.0)
        + params.alpha_d * (r_moments.k_r_d - r_moments.v_r_d)
        + params.beta * (r_moments.k_r / m.k - 1.0)
    )


def aggregated_kurtosis(params: TarchParams, horizon: int) -> float:
    """Unconditional kurtosis of the aggregated return, symmetric GARCH only."""
    if params.alpha_d != 0.0:
        raise DomainError("aggregated kurtosis formula requires alpha_d = 0")
    k1 = single_period_kurtosis(params)
    if horizon == 1:
        return k1
    zeta = persistence(params)
    gamma1 = squared_return_autocov(params)
    T = float(horizon)
    return 3.0 + (k1 - 3.0) / T + 6.0 * gamma1 * _geo_ramp(zeta, horizon) / (T * T)


def stationary_sigma3_ratio(
    params: TarchParams,
    n_paths: int = 4096,
    n_steps: int = 512,
    burn_in: int = 10_000,
    seed: int = 0,
    stability_tol: float = 0.02,
) -> float:
    """Monte Carlo estimate of E[(sigma_t/sigma)^3] over the stationary law.

    Paths are burned in, then sigma^3 is averaged over all retained steps.
    Warns when two half-sample estimates disagree by more than
    ``stability_tol`` relative, which signals that the third moment may not
    be stabilizing for these coefficients.
    """
    config = PathConfig(
        horizon_steps=n_steps, n_paths=n_paths, seed=seed, burn_in=burn_in
    )
    sig2 = simulate_variance_paths(params, config)
    sig3 = sig2 ** 1.5
    est = float(sig3.mean())
    half = n_paths // 2
    if half >= 1:
        first, second = float(sig3[:half].mean()), float(sig3[half:].mean())
        if est > 0 and abs(first - second) / est > stability_tol:
            warnings.warn(
                f"sigma^3 estimate unstable: half-sample values {first:.4g} vs {second:.4g}",
                RuntimeWarning,
            )
    return est / unconditional_variance(params) ** 1.5


def sigma3_forecast(
    params: TarchParams,
    sigma2_start: float,
    horizon: int,
    n_paths: int = 10_000,
    seed: int = 0,
) -> np.ndarray:
    """Simulated term structure E_t[sigma_{t+u}^3], u = 1..horizon."""
    config = PathConfig(
        horizon_steps=horizon, n_paths=n_paths, seed=seed,
        initial_variance=sigma2_start,
    )
    sig2 = simulate_variance_paths(params, config)
    return (sig2 ** 1.5).mean(axis=0)


def normalized_for_simulation(params: TarchParams) -> TarchParams:
    """Same dynamics with omega rescaled so the unconditional variance is 1."""
    zeta = persistence(params)
    if zeta >= 1.0:
        raise DomainError(f"persistence {zeta} >= 1: cannot normalize")
    return replace(params, omega=1.0 - zeta)
