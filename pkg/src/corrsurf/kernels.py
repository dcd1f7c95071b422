"""Scalar probability kernels: normal, bivariate normal, Student-t, root finding.

The bivariate normal cdf follows the Drezner-Wesolowsky/Genz double-precision
scheme (Gauss-Legendre quadrature of the tetrachoric integral, with a tail
transformation for |rho| >= 0.925), accurate to ~1e-15.  Everything here is a
pure function and safe to call from any number of workers.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq
from scipy.special import ndtr, ndtri, stdtr, stdtrit

from .errors import DomainError, NoBracketError

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# full symmetric Gauss-Legendre rules; order escalates with |rho|
_GL_RULES = [leggauss(6), leggauss(12), leggauss(20)]


def norm_cdf(x: float) -> float:
    """Standard normal cdf, saturating to 0/1 for large |x|."""
    return float(ndtr(x))


def norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT_2PI


def norm_inv_cdf(p: float) -> float:
    """Standard normal quantile; requires p in the open interval (0, 1)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"norm_inv_cdf requires p in (0,1), got {p}")
    return float(ndtri(p))


def _bvnu(dh: float, dk: float, r: float) -> float:
    """P(X > dh, Y > dk) for standard bivariate normal with correlation r.

    Port of the Genz BVND algorithm.  |r| must be < 1 (checked by callers).
    """
    if r == 0.0:
        return float(ndtr(-dh) * ndtr(-dk))
    h, k = dh, dk
    hk = h * k
    if abs(r) < 0.3:
        x, w = _GL_RULES[0]
    elif abs(r) < 0.75:
        x, w = _GL_RULES[1]
    else:
        x, w = _GL_RULES[2]
    bvn = 0.0
    if abs(r) < 0.925:
        hs = 0.5 * (h * h + k * k)
        asr = math.asin(r)
        sn = np.sin(asr * 0.5 * (1.0 + x))
        bvn = float(np.sum(w * np.exp((sn * hk - hs) / (1.0 - sn * sn))))
        bvn = bvn * asr / (4.0 * math.pi) + float(ndtr(-h) * ndtr(-k))
    else:
        if r < 0.0:
            k = -k
            hk = -hk
        awidth = (1.0 - r) * (1.0 + r)
        a = math.sqrt(awidth)
        bs = (h - k) ** 2
        c = (4.0 - hk) / 8.0
        d = (12.0 - hk) / 16.0
        asr = -0.5 * (bs / awidth + hk)
        if asr > -100.0:
            bvn = (
                a
                * math.exp(asr)
                * (1.0 - c * (bs - awidth) * (1.0 - d * bs / 5.0) / 3.0
                   + c * d * awidth * awidth / 5.0)
            )
        if -hk < 100.0:
            b = math.sqrt(bs)
            sp = _SQRT_2PI * float(ndtr(-b / a))
            bvn -= math.exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
        a *= 0.5
        xs = (a * (1.0 + x)) ** 2
        rs = np.sqrt(1.0 - xs)
        asr_v = -0.5 * (bs / xs + hk)
        live = asr_v > -100.0
        if np.any(live):
            sp_v = 1.0 + c * xs * (1.0 + d * xs)
            ep_v = np.exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs
            bvn += float(np.sum(a * w[live] * np.exp(asr_v[live]) * (ep_v - sp_v)[live]))
        bvn = -bvn / (2.0 * math.pi)
        if r > 0.0:
            bvn += float(ndtr(-max(h, k)))
        else:
            bvn = -bvn
            if k > h:
                bvn += float(ndtr(k) - ndtr(h))
    return min(1.0, max(0.0, bvn))


def _check_rho(rho: float) -> None:
    if not abs(rho) < 1.0:
        raise DomainError(f"correlation must satisfy |rho| < 1, got {rho}")


def binorm_cdf(x: float, y: float, rho: float) -> float:
    """P(X <= x, Y <= y) for standard bivariate normal with correlation rho."""
    _check_rho(rho)
    return _bvnu(-x, -y, rho)


def binorm_pdf(x: float, y: float, rho: float) -> float:
    """Standard bivariate normal density."""
    _check_rho(rho)
    om = 1.0 - rho * rho
    q = (x * x - 2.0 * rho * x * y + y * y) / om
    return math.exp(-0.5 * q) / (2.0 * math.pi * math.sqrt(om))


def binorm_cdf_dy(x: float, y: float, rho: float) -> float:
    """d/dy of binorm_cdf: phi(y) * Phi((x - rho*y)/sqrt(1-rho^2))."""
    _check_rho(rho)
    return norm_pdf(y) * float(ndtr((x - rho * y) / math.sqrt(1.0 - rho * rho)))


def binorm_cdf_drho(x: float, y: float, rho: float) -> float:
    """d/drho of binorm_cdf, which equals the bivariate density at (x, y)."""
    return binorm_pdf(x, y, rho)


def student_t_cdf(x: float, nu: float) -> float:
    """Cdf of the (unscaled) Student-t distribution with nu > 0 dof."""
    if nu <= 0.0:
        raise DomainError(f"student_t_cdf requires nu > 0, got {nu}")
    return float(stdtr(nu, x))


def student_t_inv(p: float, nu: float) -> float:
    if nu <= 0.0:
        raise DomainError(f"student_t_inv requires nu > 0, got {nu}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"student_t_inv requires p in (0,1), got {p}")
    if p == 0.5:
        return 0.0
    return float(stdtrit(nu, p))


def t_scale(nu: float) -> float:
    """Factor sqrt((nu-2)/nu) that rescales a Student-t variate to unit variance."""
    if nu <= 2.0:
        raise DomainError(f"unit-variance t scaling requires nu > 2, got {nu}")
    return math.sqrt((nu - 2.0) / nu)


def scaled_t_cdf(x: float, nu: float) -> float:
    """Cdf of the unit-variance (scaled) Student-t distribution."""
    return student_t_cdf(x / t_scale(nu), nu)


def scaled_t_inv(p: float, nu: float) -> float:
    return t_scale(nu) * student_t_inv(p, nu)


def scaled_t_sample(nu: float, rng: np.random.Generator, size=None):
    """Unit-variance Student-t draws (nu > 2)."""
    return rng.standard_t(nu, size=size) * t_scale(nu)


def find_root_monotone(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10
) -> float:
    """Root of a continuous monotone f on [lo, hi] bracketing zero.

    Brent's method with guaranteed-convergence bisection fallback (scipy's
    brentq); terminates when the bracket width falls below ``tol``.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise NoBracketError(
            f"f({lo})={flo} and f({hi})={fhi} do not bracket a root"
        )
    return float(brentq(f, lo, hi, xtol=tol))


def expand_bracket(
    f: Callable[[float], float],
    lo: float = -1.0,
    hi: float = 1.0,
    max_doublings: int = 64,
) -> tuple[float, float]:
    """Grow [lo, hi] geometrically until f changes sign across it."""
    flo, fhi = f(lo), f(hi)
    width = hi - lo
    for _ in range(max_doublings):
        if flo * fhi <= 0.0:
            return lo, hi
        width *= 2.0
        if abs(flo) < abs(fhi):
            lo -= width
            flo = f(lo)
        else:
            hi += width
            fhi = f(hi)
    raise NoBracketError(f"no sign change found in [{lo}, {hi}]")
