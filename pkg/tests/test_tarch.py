"""TARCH process tests: closed-form moments vs quadrature and Monte Carlo."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.stats import t as t_dist

from corrsurf.errors import DomainError, InfiniteMomentError
from corrsurf.kernels import norm_pdf, t_scale
from corrsurf.tarch import (
    InnovationMoments,
    PathConfig,
    TarchParams,
    aggregated_kurtosis,
    aggregated_skewness,
    conditional_aggregate_variance,
    conditional_third_moment,
    fold_paths,
    innovation_moments,
    leverage_correlation,
    normalized_for_simulation,
    persistence,
    persistence_second_moment,
    sigma3_forecast,
    simulate_paths,
    simulate_variance_paths,
    single_period_kurtosis,
    squared_return_autocov,
    stationary_sigma3_ratio,
    unconditional_variance,
)

FIG1 = TarchParams.normalized(alpha=0.01, alpha_d=0.10, beta=0.92)
FIG3_GARCH = TarchParams.normalized(alpha=0.045, alpha_d=0.0, beta=0.948)


def scaled_t_pdf(x: float, nu: float) -> float:
    c = t_scale(nu)
    return t_dist.pdf(x / c, nu) / c


class TestInnovationMoments:
    def test_gaussian_closed_forms(self):
        m = innovation_moments(None)
        assert m == InnovationMoments(v_d=0.5, s=0.0, s_d=-math.sqrt(2.0 / math.pi), k=3.0, k_d=1.5)
        assert m.s_d == pytest.approx(-0.79788, abs=5e-6)

    def test_gaussian_truncated_third_vs_quadrature(self):
        val, _ = quad(lambda x: x**3 * norm_pdf(x), -40, 0, epsabs=1e-14)
        assert abs(innovation_moments(None).s_d - val) < 1e-12

    def test_student_t_kurtosis(self):
        assert innovation_moments(12.0).k == pytest.approx(3.0 * 10.0 / 8.0)
        assert innovation_moments(12.0).k_d == pytest.approx(1.875)

    def test_student_t_vs_quadrature(self):
        nu = 12.0
        m = innovation_moments(nu)
        s_d, _ = quad(lambda x: x**3 * scaled_t_pdf(x, nu), -200, 0, epsabs=1e-13)
        v_d, _ = quad(lambda x: x**2 * scaled_t_pdf(x, nu), -200, 0, epsabs=1e-13)
        k_d, _ = quad(lambda x: x**4 * scaled_t_pdf(x, nu), -200, 0, epsabs=1e-13)
        assert m.s_d == pytest.approx(s_d, abs=1e-8)
        assert m.v_d == pytest.approx(v_d, abs=1e-8)
        assert m.k_d == pytest.approx(k_d, abs=1e-7)

    @pytest.mark.parametrize("nu", [4.0, 3.5, 2.5])
    def test_infinite_kurtosis(self, nu):
        with pytest.raises(InfiniteMomentError):
            innovation_moments(nu)


class TestPersistenceFactors:
    def test_fig1_persistence(self):
        assert persistence(FIG1) == pytest.approx(0.98, abs=1e-15)

    def test_garch_reduction(self):
        p = TarchParams.garch(omega=0.1, alpha=0.07, beta=0.9)
        assert persistence(p) == pytest.approx(0.97)

    def test_zero_coefficients(self):
        assert persistence(TarchParams(omega=1.0, alpha=0.0, alpha_d=0.0, beta=0.0)) == 0.0

    def test_fig1_second_moment(self):
        a, ad, b = 0.01, 0.10, 0.92
        expect = b * b + a * a * 3 + ad * ad * 1.5 + 2 * a * b + 2 * ad * b * 0.5 + 2 * a * ad * 1.5
        assert persistence_second_moment(FIG1) == pytest.approx(expect, abs=1e-15)
        assert expect == pytest.approx(0.9751)

    def test_fig3_second_moment(self):
        expect = 0.948**2 + 0.045**2 * 3 + 2 * 0.045 * 0.948
        assert persistence_second_moment(FIG3_GARCH) == pytest.approx(expect, abs=1e-15)
        assert expect == pytest.approx(0.990099)

    def test_second_moment_zero(self):
        assert persistence_second_moment(TarchParams(omega=1.0, alpha=0, alpha_d=0, beta=0)) == 0.0

    def test_second_moment_vs_mc(self):
        rng = np.random.default_rng(8)
        eps = rng.standard_normal(2_000_000)
        mult = 0.92 + (0.01 + 0.10 * (eps <= 0)) * eps * eps
        assert persistence_second_moment(FIG1) == pytest.approx((mult**2).mean(), abs=4 * (mult**2).std() / 1414)


class TestLeverage:
    def test_symmetric_garch_no_leverage(self):
        assert leverage_correlation(TarchParams.garch(0.1, 0.05, 0.9)) == 0.0

    def test_fig1_value(self):
        m = innovation_moments(None)
        zeta, xi = persistence(FIG1), persistence_second_moment(FIG1)
        expect = 0.10 * m.s_d / math.sqrt(xi - zeta * zeta)
        assert leverage_correlation(FIG1) == pytest.approx(expect, abs=1e-15)
        assert expect == pytest.approx(-0.658084, abs=1e-6)

    def test_downside_only_is_negative(self):
        p = TarchParams(omega=0.1, alpha=0.0, alpha_d=0.08, beta=0.9)
        assert leverage_correlation(p) < 0.0

    def test_degenerate(self):
        with pytest.raises(DomainError):
            leverage_correlation(TarchParams(omega=1.0, alpha=0, alpha_d=0, beta=0.5))


class TestSimulation:
    def test_iid_case_unit_variance(self):
        params = TarchParams(omega=1.0, alpha=0.0, alpha_d=0.0, beta=0.0)
        rets = simulate_paths(params, PathConfig(horizon_steps=100, n_paths=10_000, seed=4))
        r = rets.ravel()
        assert abs(r.var() - 1.0) < 0.01
        assert abs(r.mean()) < 0.005

    def test_long_path_variance_matches_unconditional(self):
        cfg = PathConfig(horizon_steps=50_000, n_paths=8, seed=10, burn_in=2_000)
        rets = simulate_paths(FIG1, cfg)
        per_path = (rets**2).mean(axis=1)
        se = per_path.std(ddof=1) / math.sqrt(len(per_path))
        assert abs(per_path.mean() - unconditional_variance(FIG1)) < 3 * se

    def test_variance_recursion_exact(self):
        cfg = PathConfig(horizon_steps=64, n_paths=3, seed=2)
        rets = simulate_paths(FIG1, cfg)
        sig2 = simulate_variance_paths(FIG1, cfg)
        om, a, ad, b = FIG1.omega, FIG1.alpha, FIG1.alpha_d, FIG1.beta
        expect = om + (a + ad * (rets[:, :-1] <= 0)) * rets[:, :-1] ** 2 + b * sig2[:, :-1]
        np.testing.assert_allclose(sig2[:, 1:], expect, rtol=1e-12)
        assert np.all(sig2[:, 0] == unconditional_variance(FIG1))

    def test_path_identity_across_n_paths(self):
        a = simulate_paths(FIG1, PathConfig(horizon_steps=16, n_paths=5000, seed=3))
        b = simulate_paths(FIG1, PathConfig(horizon_steps=16, n_paths=9000, seed=3))
        np.testing.assert_array_equal(a, b[:5000])

    def test_thread_count_invariance(self):
        cfg = PathConfig(horizon_steps=32, n_paths=12_000, seed=5)
        one = fold_paths(FIG1, cfg, lambda x: x.sum(axis=1), n_threads=1)
        four = fold_paths(FIG1, cfg, lambda x: x.sum(axis=1), n_threads=4)
        np.testing.assert_array_equal(one, four)

    def test_seed_changes_paths(self):
        a = simulate_paths(FIG1, PathConfig(horizon_steps=8, n_paths=10, seed=1))
        b = simulate_paths(FIG1, PathConfig(horizon_steps=8, n_paths=10, seed=2))
        assert not np.array_equal(a, b)

    def test_student_t_shocks(self):
        params = TarchParams(omega=1.0, alpha=0.0, alpha_d=0.0, beta=0.0, nu=12.0)
        rets = simulate_paths(params, PathConfig(horizon_steps=200, n_paths=5_000, seed=6))
        r = rets.ravel()
        assert abs(r.var() - 1.0) < 0.01
        k = (r**4).mean() / (r**2).mean() ** 2
        assert abs(k - 3.75) < 0.15

    def test_omega_zero_rejected(self):
        params = TarchParams(omega=0.0, alpha=0.1, alpha_d=0.0, beta=0.8)
        with pytest.raises(DomainError):
            simulate_paths(params, PathConfig(horizon_steps=4, n_paths=2, seed=0))

    def test_negative_coefficients_rejected(self):
        with pytest.raises(DomainError):
            TarchParams(omega=1.0, alpha=-0.1, alpha_d=0.0, beta=0.5)


class TestAggregateVariance:
    def test_at_stationary_level(self):
        s2 = unconditional_variance(FIG1)
        assert conditional_aggregate_variance(FIG1, s2, 260) == pytest.approx(260 * s2)

    def test_one_step(self):
        assert conditional_aggregate_variance(FIG1, 1.7, 1) == pytest.approx(1.7)

    def test_ramp_value(self):
        # zeta=0.98, sigma2=1, initial 2, T=260: T + (1 - zeta^T)/(1 - zeta)
        expect = 260.0 + (1.0 - 0.98**260) / 0.02
        assert conditional_aggregate_variance(FIG1, 2.0, 260) == pytest.approx(expect, rel=1e-12)
        assert expect == pytest.approx(309.738, abs=5e-3)

    def test_vs_simulated_second_moment(self):
        cfg = PathConfig(horizon_steps=52, n_paths=200_000, seed=11, initial_variance=2.0)
        agg = fold_paths(FIG1, cfg, lambda x: x.sum(axis=1))
        v = conditional_aggregate_variance(FIG1, 2.0, 52)
        se = (agg**2).std() / math.sqrt(len(agg))
        assert abs((agg**2).mean() - v) < 4 * se


class TestSkewness:
    def test_one_step_gaussian(self):
        assert aggregated_skewness(FIG1, 1, sigma3_ratio=1.3) == 0.0

    def test_symmetric_garch_zero(self):
        for T in (1, 13, 260):
            assert aggregated_skewness(FIG3_GARCH, T, sigma3_ratio=1.2) == 0.0

    def test_two_step_closed_form(self):
        # E R^3 at T=2 is 3 alpha_d s_d E sigma^3 for Gaussian shocks
        m = innovation_moments(None)
        ratio = 1.17
        expect = 3.0 * FIG1.alpha_d * m.s_d * ratio / 2.0**1.5
        assert aggregated_skewness(FIG1, 2, ratio) == pytest.approx(expect, rel=1e-12)

    def test_formula_vs_mc(self):
        ratio = stationary_sigma3_ratio(FIG1, n_paths=4096, n_steps=512, burn_in=6_000, seed=9)
        T = 52
        cfg = PathConfig(horizon_steps=T, n_paths=300_000, seed=13, burn_in=2_000)
        agg = fold_paths(FIG1, cfg, lambda x: x.sum(axis=1))
        mc = (agg**3).mean() / (agg**2).mean() ** 1.5
        batches = agg.reshape(20, -1)
        vals = (batches**3).mean(axis=1) / (batches**2).mean(axis=1) ** 1.5
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        assert abs(aggregated_skewness(FIG1, T, ratio) - mc) < 3 * se


class TestConditionalThirdMoment:
    def test_symmetric_garch_zero(self):
        fc = np.full(13, 1.1)
        assert conditional_third_moment(FIG3_GARCH, fc) == 0.0

    def test_one_step(self):
        params = TarchParams.normalized(0.01, 0.10, 0.92, nu=12.0)
        m = innovation_moments(12.0)
        fc = np.array([1.23])
        # the lag-weight sum has zero weight at u = T
        assert conditional_third_moment(params, fc) == pytest.approx(m.s * 1.23)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            conditional_third_moment(FIG1, np.ones(5), horizon=6)

    def test_vs_mc_third_moment(self):
        T = 26
        start = 2.0
        fc = sigma3_forecast(FIG1, start, T, n_paths=30_000, seed=14)
        formula = conditional_third_moment(FIG1, fc)
        cfg = PathConfig(horizon_steps=T, n_paths=400_000, seed=15, initial_variance=start)
        agg = fold_paths(FIG1, cfg, lambda x: x.sum(axis=1))
        se = (agg**3).std() / math.sqrt(len(agg))
        assert abs((agg**3).mean() - formula) < 4 * se


class TestKurtosis:
    def test_iid_limit(self):
        params = TarchParams(omega=1.0, alpha=0.0, alpha_d=0.0, beta=0.3)
        assert single_period_kurtosis(params) == pytest.approx(3.0)

    def test_fig1_value(self):
        zeta, xi = 0.98, persistence_second_moment(FIG1)
        expect = 3.0 * (1 - zeta**2) / (1 - xi)
        assert single_period_kurtosis(FIG1) == pytest.approx(expect, rel=1e-12)
        assert expect == pytest.approx(4.771084, abs=1e-6)

    def test_student_t_low_nu_error(self):
        with pytest.raises(InfiniteMomentError):
            single_period_kurtosis(TarchParams.normalized(0.01, 0.1, 0.92, nu=4.0))

    def test_xi_above_one_error(self):
        params = TarchParams(omega=0.1, alpha=0.6, alpha_d=0.0, beta=0.5)
        with pytest.raises(InfiniteMomentError):
            single_period_kurtosis(params)

    def test_autocov_matches_textbook_garch_acf(self):
        # corr(r_{t-1}^2, r_t^2) = alpha (1 - alpha beta - beta^2)/(1 - 2 alpha beta - beta^2)
        for alpha, beta in [(0.1, 0.8), (0.05, 0.9), (0.045, 0.948)]:
            params = TarchParams.normalized(alpha, 0.0, beta)
            k1 = single_period_kurtosis(params)
            corr = squared_return_autocov(params) / (k1 - 1.0)
            expect = alpha * (1 - alpha * beta - beta**2) / (1 - 2 * alpha * beta - beta**2)
            assert corr == pytest.approx(expect, rel=1e-10)

    def test_autocov_vs_mc(self):
        params = TarchParams.normalized(0.1, 0.0, 0.8)
        cfg = PathConfig(horizon_steps=100_000, n_paths=10, seed=5, burn_in=2_000)
        rets = simulate_paths(params, cfg)
        x, y = rets[:, :-1].ravel() ** 2, rets[:, 1:].ravel() ** 2
        cov = (x * y).mean() - x.mean() * y.mean()
        assert abs(cov - squared_return_autocov(params)) < 0.05

    def test_autocov_requires_moments_for_tarch(self):
        with pytest.raises(DomainError):
            squared_return_autocov(FIG1)

    def test_aggregated_kurtosis_limits(self):
        assert aggregated_kurtosis(FIG3_GARCH, 1) == pytest.approx(single_period_kurtosis(FIG3_GARCH))
        assert abs(aggregated_kurtosis(FIG3_GARCH, 100_000) - 3.0) < 0.01

    def test_aggregated_kurtosis_requires_symmetric_garch(self):
        with pytest.raises(DomainError):
            aggregated_kurtosis(FIG1, 52)

    def test_lemma_style_cov_decay(self):
        # cov(r_t, r_{t+u}^2) decays geometrically at rate zeta
        cfg = PathConfig(horizon_steps=60_000, n_paths=12, seed=21, burn_in=2_000)
        rets = simulate_paths(FIG1, cfg)
        zeta = persistence(FIG1)
        covs = []
        for u in range(1, 7):
            x, y = rets[:, :-u].ravel(), rets[:, u:].ravel() ** 2
            covs.append((x * y).mean() - x.mean() * y.mean())
        covs = np.array(covs)
        assert np.all(covs < 0.0)
        # geometric decay rate averaged over lags beats per-lag ratio noise
        rate = (covs[5] / covs[0]) ** 0.2
        assert rate == pytest.approx(zeta, abs=0.03)


class TestStationaryEstimators:
    def test_iid_sigma3_ratio_is_one(self):
        params = TarchParams(omega=2.0, alpha=0.0, alpha_d=0.0, beta=0.0)
        ratio = stationary_sigma3_ratio(params, n_paths=512, n_steps=16, burn_in=10, seed=1)
        assert ratio == pytest.approx(1.0)

    def test_sigma3_forecast_iid(self):
        params = TarchParams(omega=2.0, alpha=0.0, alpha_d=0.0, beta=0.0)
        fc = sigma3_forecast(params, 2.0, 5, n_paths=256, seed=1)
        # variance jumps to omega after the first step
        assert fc[0] == pytest.approx(2.0**1.5)
        np.testing.assert_allclose(fc[1:], 2.0**1.5, rtol=1e-12)

    def test_normalized_for_simulation(self):
        params = TarchParams(omega=0.02, alpha=0.01, alpha_d=0.10, beta=0.92)
        assert unconditional_variance(normalized_for_simulation(params)) == pytest.approx(1.0)

    @given(
        st.floats(min_value=0.0, max_value=0.1),
        st.floats(min_value=0.0, max_value=0.15),
        st.floats(min_value=0.5, max_value=0.85),
    )
    @settings(max_examples=30)
    def test_normalization_property(self, alpha, alpha_d, beta):
        params = TarchParams.normalized(alpha, alpha_d, beta)
        assert unconditional_variance(params) == pytest.approx(1.0)
        assert persistence(params) < 1.0
