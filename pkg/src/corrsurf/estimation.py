"""Maximum-likelihood estimation of GARCH/TARCH models from return series.

Includes the data-preparation steps used for equity-index returns: log-return
construction from price levels, calendar-week aggregation (weeks ending
Friday), and winsorization of the most extreme observations.  The likelihood
uses the exact variance recursion written as a linear filter, and fits run a
derivative-free simplex refined by quasi-Newton on log-transformed
parameters so the positivity constraints stay implicit.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter
from scipy.special import gammaln

from .errors import DomainError
from .tarch import TarchParams

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ReturnSeries:
    dates: np.ndarray      # datetime64[D], strictly increasing
    returns: np.ndarray
    frequency: str         # "daily" | "weekly"

    def __post_init__(self):
        if len(self.dates) != len(self.returns):
            raise DomainError("dates and returns must have equal length")
        if len(self.dates) > 1 and not np.all(np.diff(self.dates).astype(int) > 0):
            raise DomainError("dates must be strictly increasing")
        if not np.all(np.isfinite(self.returns)):
            raise DomainError("returns must be finite")


@dataclass(frozen=True)
class ReturnMoments:
    """Standardized raw moments of a return sample (zero-mean convention)."""

    s_r: float     # E r^3 / (E r^2)^{3/2}
    s_r_d: float   # E[r^3 1{r<=0}] / (E r^2)^{3/2}
    k_r: float     # E r^4 / (E r^2)^2
    k_r_d: float   # E[r^4 1{r<=0}] / (E r^2)^2
    v_r_d: float   # E[r^2 1{r<=0}] / E r^2


@dataclass(frozen=True)
class FitResult:
    params: TarchParams
    std_errors: dict
    loglik: float
    converged: bool
    n_obs: int
    model: str       # "garch" | "tarch"
    innovation: str  # "gaussian" | "student_t"


def prices_to_log_returns(dates, levels, frequency: str = "daily") -> ReturnSeries:
    """Log returns ln(S_t) - ln(S_{t-1}), stamped with the later date."""
    dates = np.asarray(dates, dtype="datetime64[D]")
    levels = np.asarray(levels, dtype=float)
    if len(levels) < 2:
        raise DomainError("need at least two price observations")
    if np.any(levels <= 0.0):
        raise DomainError("price levels must be positive")
    rets = np.diff(np.log(levels))
    return ReturnSeries(dates=dates[1:], returns=rets, frequency=frequency)


def weekly_from_daily(series: ReturnSeries) -> ReturnSeries:
    """Sum daily log returns within calendar weeks ending Friday."""
    days = series.dates.astype("datetime64[D]").view("int64")
    # epoch day 0 (1970-01-01) was a Thursday; Monday-based weekday index
    weekday = (days + 3) % 7
    fridays = series.dates + ((4 - weekday) % 7).astype("timedelta64[D]")
    keys, inverse = np.unique(fridays, return_inverse=True)
    sums = np.zeros(len(keys))
    np.add.at(sums, inverse, series.returns)
    return ReturnSeries(dates=keys, returns=sums, frequency="weekly")


def trim_extremes(series: ReturnSeries, fraction: float = 0.001) -> ReturnSeries:
    """Winsorize returns at the (fraction, 1-fraction) empirical quantiles."""
    if not 0.0 < fraction < 0.05:
        raise DomainError(f"trim fraction must be in (0, 0.05), got {fraction}")
    lo, hi = np.quantile(series.returns, [fraction, 1.0 - fraction])
    return ReturnSeries(
        dates=series.dates,
        returns=np.clip(series.returns, lo, hi),
        frequency=series.frequency,
    )


def sample_moments(returns) -> ReturnMoments:
    """Raw-moment skewness/kurtosis and their left-truncated counterparts."""
    r = np.asarray(returns, dtype=float)
    if len(r) < 2:
        raise DomainError("need at least two observations")
    m2 = float((r * r).mean())
    if m2 == 0.0:
        raise DomainError("zero-variance return sample")
    neg = r <= 0.0
    return ReturnMoments(
        s_r=float((r**3).mean()) / m2**1.5,
        s_r_d=float((r**3 * neg).mean()) / m2**1.5,
        k_r=float((r**4).mean()) / m2**2,
        k_r_d=float((r**4 * neg).mean()) / m2**2,
        v_r_d=float((r**2 * neg).mean()) / m2,
    )


def overlapping_aggregate_skewness(returns, horizon: int) -> float:
    """Raw skewness of overlapping ``horizon``-step aggregated returns."""
    r = np.asarray(returns, dtype=float)
    if horizon < 1 or horizon > len(r):
        raise DomainError("horizon must be in [1, len(returns)]")
    csum = np.concatenate(([0.0], np.cumsum(r)))
    agg = csum[horizon:] - csum[:-horizon]
    m2 = float((agg * agg).mean())
    return float((agg**3).mean()) / m2**1.5


def variance_path(params: TarchParams, returns: np.ndarray, initial_variance=None) -> np.ndarray:
    """Conditional variance recursion evaluated exactly via a linear filter."""
    r = np.asarray(returns, dtype=float)
    if initial_variance is None:
        initial_variance = float(r.var())
        if initial_variance <= 0.0:
            # degenerate sample: fall back to the model-implied level
            zeta = params.beta + params.alpha + 0.5 * params.alpha_d
            initial_variance = params.omega / (1.0 - zeta) if zeta < 1.0 else params.omega
    drive = params.omega + (params.alpha + params.alpha_d * (r[:-1] <= 0.0)) * r[:-1] ** 2
    x = np.concatenate(([initial_variance], drive))
    return lfilter([1.0], [1.0, -params.beta], x)


def neg_log_likelihood(
    params: TarchParams, returns, initial_variance=None
) -> float:
    """Negative log likelihood of the return series under the variance recursion."""
    r = np.asarray(returns, dtype=float)
    sig2 = variance_path(params, r, initial_variance)
    if np.any(sig2 <= 0.0) or not np.all(np.isfinite(sig2)):
        return math.inf
    if params.nu is None:
        return float(0.5 * np.sum(_LOG_2PI + np.log(sig2) + r * r / sig2))
    nu = params.nu
    logc = (
        gammaln(0.5 * (nu + 1.0))
        - gammaln(0.5 * nu)
        - 0.5 * math.log(math.pi * (nu - 2.0))
    )
    z2 = r * r / ((nu - 2.0) * sig2)
    return float(
        np.sum(-logc + 0.5 * np.log(sig2) + 0.5 * (nu + 1.0) * np.log1p(z2))
    )


_PARAM_ORDER = ("omega", "alpha", "alpha_d", "beta", "nu")


def _pack(params: TarchParams, model: str, innovation: str) -> np.ndarray:
    theta = [math.log(max(params.omega, 1e-300)),
             math.log(max(params.alpha, 1e-12)),
             math.log(max(params.beta, 1e-12))]
    if model == "tarch":
        theta.insert(2, math.log(max(params.alpha_d, 1e-12)))
    if innovation == "student_t":
        theta.append(math.log((params.nu or 8.0) - 2.0))
    return np.array(theta)


def _unpack(theta: np.ndarray, model: str, innovation: str) -> TarchParams:
    vals = np.exp(np.clip(theta, -60.0, 60.0))
    if model == "tarch":
        omega, alpha, alpha_d, beta = vals[0], vals[1], vals[2], vals[3]
        rest = vals[4:]
    else:
        omega, alpha, beta = vals[0], vals[1], vals[2]
        alpha_d, rest = 0.0, vals[3:]
    nu = 2.0 + rest[0] if innovation == "student_t" else None
    return TarchParams(omega=float(omega), alpha=float(alpha),
                       alpha_d=float(alpha_d), beta=float(beta),
                       nu=None if nu is None else float(nu))


def fit(
    series: ReturnSeries | np.ndarray,
    model: str = "tarch",
    innovation: str = "gaussian",
    start: TarchParams | None = None,
) -> FitResult:
    """Fit GARCH/TARCH by maximum likelihood.

    Non-convergence is reported through the ``converged`` flag; the best
    point found is always returned.  Standard errors come from the inverse
    numerical Hessian of the negative log likelihood at the optimum.
    """
    if model not in ("garch", "tarch"):
        raise DomainError(f"unknown model {model!r}")
    if innovation not in ("gaussian", "student_t"):
        raise DomainError(f"unknown innovation {innovation!r}")
    r = series.returns if isinstance(series, ReturnSeries) else np.asarray(series, float)
    if len(r) < 200:
        raise DomainError(f"need at least 200 observations, got {len(r)}")
    sample_var = float(r.var())
    if start is None:
        alpha0 = 0.05
        alpha_d0 = 0.05 if model == "tarch" else 0.0
        beta0 = 0.85
        zeta0 = alpha0 + 0.5 * alpha_d0 + beta0
        start = TarchParams(
            omega=sample_var * (1.0 - zeta0), alpha=alpha0, alpha_d=alpha_d0,
            beta=beta0, nu=8.0 if innovation == "student_t" else None,
        )

    def objective(theta: np.ndarray) -> float:
        try:
            return neg_log_likelihood(_unpack(theta, model, innovation), r)
        except (DomainError, OverflowError):
            return math.inf

    theta0 = _pack(start, model, innovation)
    res_nm = minimize(objective, theta0, method="Nelder-Mead",
                      options={"maxiter": 4000, "xatol": 1e-8, "fatol": 1e-10})
    res = minimize(objective, res_nm.x, method="L-BFGS-B",
                   options={"maxiter": 500})
    best = res if res.fun <= res_nm.fun else res_nm
    params = _unpack(best.x, model, innovation)
    loglik = -float(best.fun)

    std_errors, hess_ok = _hessian_std_errors(params, r, model, innovation)
    converged = bool((res_nm.success or res.success) and math.isfinite(loglik) and hess_ok)
    return FitResult(
        params=params, std_errors=std_errors, loglik=loglik,
        converged=converged, n_obs=len(r), model=model, innovation=innovation,
    )


def _free_params(params: TarchParams, model: str, innovation: str):
    names = ["omega", "alpha"] + (["alpha_d"] if model == "tarch" else []) + ["beta"]
    if innovation == "student_t":
        names.append("nu")
    values = np.array([getattr(params, n) for n in names], dtype=float)
    return names, values


def _with_values(params: TarchParams, names, values) -> TarchParams:
    kw = {"omega": params.omega, "alpha": params.alpha,
          "alpha_d": params.alpha_d, "beta": params.beta, "nu": params.nu}
    kw.update(dict(zip(names, values)))
    return TarchParams(**kw)


def _hessian_std_errors(params, r, model, innovation):
    """Asymptotic standard errors from the inverse numerical Hessian."""
    names, values = _free_params(params, model, innovation)

    def nll_at(v: np.ndarray) -> float:
        if np.any(v[: len(names) - (1 if innovation == "student_t" else 0)] < 0.0):
            return math.inf
        try:
            return neg_log_likelihood(_with_values(params, names, v), r)
        except DomainError:
            return math.inf

    n = len(values)
    steps = np.maximum(1e-4 * np.abs(values), 1e-7)
    hess = np.empty((n, n))
    f0 = nll_at(values)
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n); ei[i] = steps[i]
            ej = np.zeros(n); ej[j] = steps[j]
            if i == j:
                val = (nll_at(values + ei) - 2.0 * f0 + nll_at(values - ei)) / steps[i] ** 2
            else:
                val = (
                    nll_at(values + ei + ej)
                    - nll_at(values + ei - ej)
                    - nll_at(values - ei + ej)
                    + nll_at(values - ei - ej)
                ) / (4.0 * steps[i] * steps[j])
            hess[i, j] = hess[j, i] = val
    errors = {name: math.nan for name in names}
    ok = bool(np.all(np.isfinite(hess)))
    if ok:
        try:
            cov = np.linalg.inv(hess)
            diag = np.diag(cov)
            ok = bool(np.all(diag > 0.0))
            if ok:
                for name, v in zip(names, np.sqrt(diag)):
                    errors[name] = float(v)
        except np.linalg.LinAlgError:
            ok = False
    return errors, ok


def read_series_csv(path) -> tuple[str, np.ndarray, np.ndarray]:
    """Read a (date, level) or (date, return) CSV with an ISO-date header row.

    Returns (kind, dates, values) where kind is "level" or "return".
    """
    with open(Path(path), newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise DomainError(f"{path}: expected a header row with two columns")
        kind = header[1].strip().lower()
        if kind in ("level", "price", "close"):
            kind = "level"
        elif kind == "return":
            kind = "return"
        else:
            raise DomainError(
                f"{path}: second column must be named level/price/close or return"
            )
        dates, values = [], []
        for row in reader:
            if not row:
                continue
            dates.append(np.datetime64(row[0].strip(), "D"))
            values.append(float(row[1]))
    return kind, np.array(dates, dtype="datetime64[D]"), np.array(values)


def load_return_series(path, weekly: bool = False) -> ReturnSeries:
    """Load a CSV and produce a return series, optionally weekly-aggregated."""
    kind, dates, values = read_series_csv(path)
    if kind == "level":
        series = prices_to_log_returns(dates, values, frequency="daily")
    else:
        series = ReturnSeries(dates=dates, returns=values, frequency="daily")
    if weekly:
        series = weekly_from_daily(series)
    return series
