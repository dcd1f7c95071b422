"""Correlation surface: mapping loss-generating models into Gaussian-copula units.

For a model's expected equity-tranche loss at detachment K and horizon T, the
surface value rho(K, T) is the Gaussian-copula correlation reproducing that
loss.  Monotonicity of the Gaussian tranche loss in rho makes the inversion
unique.  The surface level and K-slope reconstruct the loss cdf, and its
hazard sensitivity drives the tranche delta adjustment.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, TargetOutOfRangeError
from .gaussian import (
    expected_equity_loss,
    expected_equity_loss_dh,
    expected_equity_loss_drho,
    hazard_to_p,
    vasicek_d1,
)
from .kernels import binorm_pdf, find_root_monotone, norm_cdf, norm_inv_cdf
from .factor_mc import FactorModelSpec, LossEngine, LossSample, equity_loss_curve
from .streams import task_seed

_RHO_LO = 1e-12
_RHO_HI = 1.0 - 1e-12


def el_bounds(k: float, p: float, recovery: float) -> tuple[float, float]:
    """Attainable equity-tranche expected-loss range (comonotone, independence)."""
    lgd = 1.0 - recovery
    return p * min(k, lgd), min(k, lgd * p)


def implied_corr(
    target_el: float,
    k: float,
    p: float,
    recovery: float,
    tol: float = 1e-10,
    boundary_tol: float = 1e-12,
) -> float:
    """Gaussian-copula correlation whose equity-tranche loss matches ``target_el``.

    Returns a value in (0, 1) for interior targets; targets within
    ``boundary_tol`` of an attainable-range endpoint return the flagged
    boundary values 0.0 (independence) or 1.0 (comonotone).  Targets outside
    the range raise :class:`TargetOutOfRangeError` naming the violated bound.
    """
    if k >= 1.0 - recovery:
        raise DomainError(
            "correlation is unidentified once the tranche absorbs the whole loss"
        )
    lower, upper = el_bounds(k, p, recovery)
    if target_el > upper + boundary_tol:
        raise TargetOutOfRangeError(
            f"target {target_el} above independence bound {upper}", bound="independence"
        )
    if target_el < lower - boundary_tol:
        raise TargetOutOfRangeError(
            f"target {target_el} below comonotone bound {lower}", bound="comonotone"
        )
    if target_el >= upper - boundary_tol:
        return 0.0
    if target_el <= lower + boundary_tol:
        return 1.0

    def gap(rho: float) -> float:
        return expected_equity_loss(k, p, recovery, rho) - target_el

    g_lo, g_hi = gap(_RHO_LO), gap(_RHO_HI)
    # decreasing in rho: gap(_RHO_LO) should be positive for interior targets
    if g_lo <= 0.0:
        return 0.0
    if g_hi >= 0.0:
        return 1.0
    rho = find_root_monotone(gap, _RHO_LO, _RHO_HI, tol=1e-13)
    if abs(gap(rho)) > tol:
        raise DomainError(f"inversion residual {gap(rho)} exceeds tolerance {tol}")
    return rho


@dataclass
class SurfaceSlice:
    """One maturity slice of the correlation surface."""

    k_grid: np.ndarray
    values: np.ndarray
    valid: np.ndarray      # inversion succeeded
    boundary: np.ndarray   # -1 independence bound, +1 comonotone bound, 0 interior


def slice_from_losses(
    loss_sample: LossSample, k_grid, p: float, recovery: float
) -> SurfaceSlice:
    """Invert a Monte Carlo loss sample into correlations over a detachment grid."""
    k_grid = np.asarray(k_grid, dtype=float)
    els = equity_loss_curve(loss_sample, k_grid)
    values = np.full(len(k_grid), np.nan)
    valid = np.zeros(len(k_grid), dtype=bool)
    boundary = np.zeros(len(k_grid), dtype=np.int8)
    for i, (k, el) in enumerate(zip(k_grid, els)):
        try:
            rho = implied_corr(el, float(k), p, recovery)
        except (TargetOutOfRangeError, DomainError):
            continue
        values[i] = rho
        valid[i] = True
        if rho == 0.0:
            boundary[i] = -1
        elif rho == 1.0:
            boundary[i] = 1
    return SurfaceSlice(k_grid=k_grid, values=values, valid=valid, boundary=boundary)


@dataclass
class CorrSurface:
    """Correlation grid rho(K, T) with per-cell validity and boundary flags."""

    k_grid: np.ndarray
    t_grid: np.ndarray      # years
    values: np.ndarray      # shape (len(k_grid), len(t_grid))
    valid: np.ndarray
    boundary: np.ndarray
    p_by_t: np.ndarray
    recovery: float
    model_id: str = ""
    equity_loss: np.ndarray | None = None  # tranche ELs the cells were inverted from

    def slope_k(self, i_k: int, i_t: int) -> float:
        """Finite-difference surface slope along K (central where possible)."""
        v = self.values[:, i_t]
        ok = self.valid[:, i_t]
        k = self.k_grid
        lo = i_k - 1 if i_k > 0 else i_k
        hi = i_k + 1 if i_k + 1 < len(k) else i_k
        if lo == hi:
            raise DomainError("grid too short for a K-slope")
        if not (ok[lo] and ok[hi]):
            warnings.warn("invalid neighbor cell: K-slope unavailable", RuntimeWarning)
            return math.nan
        return float((v[hi] - v[lo]) / (k[hi] - k[lo]))


def default_steps(t_years: float, steps_per_year: int = 52) -> int:
    steps = round(t_years * steps_per_year)
    if steps < 1:
        raise DomainError(f"horizon {t_years}y is below one simulation step")
    return steps


def build_surface(
    spec: FactorModelSpec,
    k_grid,
    t_grid,
    hazard: float,
    n_paths: int = 100_000,
    seed: int = 0,
    discrete_hazard: bool = False,
    steps_per_year: int = 52,
    n_threads: int = 1,
    model_id: str = "",
) -> CorrSurface:
    """Monte Carlo correlation surface over (K, T) for a one-factor loss model.

    One factor sample per maturity is shared read-only across all detachment
    cells; inversion failures mark cells invalid instead of aborting.
    """
    k_grid = np.asarray(k_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(k_grid) <= 0) or np.any(np.diff(t_grid) <= 0):
        raise DomainError("grids must be strictly increasing")
    nk, nt = len(k_grid), len(t_grid)
    values = np.full((nk, nt), np.nan)
    valid = np.zeros((nk, nt), dtype=bool)
    boundary = np.zeros((nk, nt), dtype=np.int8)
    els = np.empty((nk, nt))
    p_by_t = np.empty(nt)
    for j, t in enumerate(t_grid):
        steps = default_steps(float(t), steps_per_year)
        p_t = hazard_to_p(hazard, float(t), discrete=discrete_hazard)
        p_by_t[j] = p_t
        engine = LossEngine(
            replace(spec, horizon_steps=steps),
            n_paths,
            task_seed(seed, f"factor/T={steps}"),
            n_threads=n_threads,
        )
        losses = engine.losses(p_t)
        els[:, j] = equity_loss_curve(losses, k_grid)
        sl = slice_from_losses(losses, k_grid, p_t, spec.recovery)
        values[:, j] = sl.values
        valid[:, j] = sl.valid
        boundary[:, j] = sl.boundary
    return CorrSurface(
        k_grid=k_grid, t_grid=t_grid, values=values, valid=valid,
        boundary=boundary, p_by_t=p_by_t, recovery=spec.recovery,
        model_id=model_id, equity_loss=els,
    )


def hazard_bumped_slices(
    spec: FactorModelSpec,
    k_grid,
    t_years: float,
    hazard: float,
    bump: float = 0.0025,
    n_paths: int = 100_000,
    seed: int = 0,
    steps_per_year: int = 52,
    n_threads: int = 1,
) -> tuple[SurfaceSlice, SurfaceSlice, float, float]:
    """Surface slices at hazard and hazard+bump on one common factor sample.

    Common random numbers make the difference quotient usable as drho/dh.
    Returns (base slice, bumped slice, p at hazard, p at hazard+bump).
    """
    k_grid = np.asarray(k_grid, dtype=float)
    steps = default_steps(t_years, steps_per_year)
    engine = LossEngine(
        replace(spec, horizon_steps=steps),
        n_paths,
        task_seed(seed, f"factor/T={steps}"),
        n_threads=n_threads,
    )
    p0 = hazard_to_p(hazard, t_years)
    p1 = hazard_to_p(hazard + bump, t_years)
    base = slice_from_losses(engine.losses(p0), k_grid, p0, spec.recovery)
    bumped = slice_from_losses(engine.losses(p1), k_grid, p1, spec.recovery)
    return base, bumped, p0, p1


def surface_slope_h(
    spec: FactorModelSpec,
    k: float,
    t_years: float,
    hazard: float,
    bump: float = 0.0025,
    n_paths: int = 100_000,
    seed: int = 0,
    steps_per_year: int = 52,
    n_threads: int = 1,
) -> float:
    """drho/dh at one detachment by bump-and-reprice with common random numbers."""
    base, bumped, _, _ = hazard_bumped_slices(
        spec, [k], t_years, hazard, bump, n_paths, seed, steps_per_year, n_threads
    )
    return float((bumped.values[0] - base.values[0]) / bump)


def loss_cdf_from_surface(
    rho: float, rho_k: float, k: float, p: float, recovery: float
) -> float:
    """Loss cdf reconstructed from the surface level and K-slope.

    P(L <= K) = 1 - Phi(d1) + ((1-R)/(2 sqrt(rho))) phi2(Phi^-1(p), -d1; -sqrt(rho)) rho_K,
    which reduces to the Gaussian-factor cdf when the surface is flat.  Values
    outside [0, 1] indicate an inconsistent surface and trigger a warning
    rather than silent clamping.
    """
    d1 = vasicek_d1(k, p, recovery, rho)
    sq = math.sqrt(rho)
    bump = (1.0 - recovery) / (2.0 * sq) * binorm_pdf(norm_inv_cdf(p), -d1, -sq)
    value = 1.0 - norm_cdf(d1) + bump * rho_k
    if not 0.0 <= value <= 1.0:
        warnings.warn(
            f"reconstructed cdf {value} outside [0,1]: inconsistent surface",
            RuntimeWarning,
        )
    return value


def tranche_sensitivity_ratio(
    k: float, p_t: float, recovery: float, rho: float, t: float
) -> float:
    """Ratio of the rho- to hazard-sensitivity of the equity-tranche loss."""
    if t <= 0.0:
        raise DomainError(f"horizon must be positive, got {t}")
    lgd = 1.0 - recovery
    if k >= lgd:
        return 0.0
    d1 = vasicek_d1(k, p_t, recovery, rho)
    sq = math.sqrt(rho)
    a = norm_inv_cdf(p_t)
    numer = binorm_pdf(a, -d1, -sq)
    denom = norm_cdf((-d1 + sq * a) / math.sqrt(1.0 - rho))
    return -numer / denom / (2.0 * (1.0 - p_t) * t * sq)


@dataclass
class DeltaReport:
    """Tranche-delta adjustment components over a detachment grid."""

    k_grid: np.ndarray
    rho: np.ndarray
    rho_h: np.ndarray
    psi: np.ndarray
    delta_adj: np.ndarray
    gaussian_delta_proxy: np.ndarray
    t_years: float
    hazard: float
    bump: float
    recovery: float


def delta_adjustment(
    spec: FactorModelSpec,
    k_grid,
    t_years: float,
    hazard: float,
    bump: float = 0.0025,
    n_paths: int = 100_000,
    seed: int = 0,
    steps_per_year: int = 52,
    n_threads: int = 1,
) -> DeltaReport:
    """Delta adjustment delta_adj = rho_h * Psi across detachments.

    rho_h comes from bump-and-reprice of the surface on common random
    numbers; Psi and the Gaussian delta proxy are evaluated at the base
    surface level.
    """
    base, bumped, p0, _ = hazard_bumped_slices(
        spec, k_grid, t_years, hazard, bump, n_paths, seed, steps_per_year, n_threads
    )
    k_grid = base.k_grid
    rho_h = (bumped.values - base.values) / bump
    psi = np.array(
        [
            tranche_sensitivity_ratio(float(k), p0, spec.recovery, float(r), t_years)
            if np.isfinite(r) and 0.0 < r < 1.0
            else np.nan
            for k, r in zip(k_grid, base.values)
        ]
    )
    proxy = np.array(
        [
            expected_equity_loss_dh(float(k), p0, spec.recovery, float(r), t_years, hazard)
            if np.isfinite(r) and 0.0 < r < 1.0
            else np.nan
            for k, r in zip(k_grid, base.values)
        ]
    )
    return DeltaReport(
        k_grid=k_grid,
        rho=base.values,
        rho_h=rho_h,
        psi=psi,
        delta_adj=rho_h * psi,
        gaussian_delta_proxy=proxy,
        t_years=t_years,
        hazard=hazard,
        bump=bump,
        recovery=spec.recovery,
    )
