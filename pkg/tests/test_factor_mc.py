"""Factor Monte Carlo tests: calibration, LHP mapping, default correlation."""
import math

import numpy as np
import pytest
from scipy.special import ndtr, ndtri
from scipy.stats import kstest

from corrsurf.errors import DomainError
from corrsurf.factor_mc import (
    DoubleTFactor,
    FactorModelSpec,
    GaussianFactor,
    LossEngine,
    LossSample,
    StudentTMixingFactor,
    TarchFactor,
    calibrate_threshold,
    default_corr_mc,
    equity_loss_curve,
    expected_tranche_loss_mc,
    idio_cdf,
    lhp_losses,
    sample_factor,
)
from corrsurf.gaussian import expected_equity_loss, gaussian_default_corr
from corrsurf.tarch import TarchParams

FIG1 = TarchParams.normalized(0.01, 0.10, 0.92)
B03 = math.sqrt(0.3)


def gauss_spec(**kw):
    return FactorModelSpec.from_rho(GaussianFactor(), 0.3, **kw)


class TestSpec:
    def test_rho_is_loading_squared(self):
        spec = FactorModelSpec(factor=GaussianFactor(), loading=0.5)
        assert spec.rho == pytest.approx(0.25)

    def test_loading_domain(self):
        with pytest.raises(DomainError):
            FactorModelSpec(factor=GaussianFactor(), loading=1.2)

    def test_p_resolution(self):
        spec = FactorModelSpec(factor=GaussianFactor(), loading=0.5, hazard=0.02, t_years=5.0)
        assert spec.resolve_p() == pytest.approx(1.0 - math.exp(-0.1))
        with pytest.raises(DomainError):
            FactorModelSpec(factor=GaussianFactor(), loading=0.5).resolve_p()


class TestSampleFactor:
    def test_gaussian_normalization_and_ks(self):
        sample = sample_factor(gauss_spec(), 50_000, seed=1)
        assert sample.values.std() == pytest.approx(1.0, abs=1e-12)
        assert kstest(sample.values, "norm").pvalue > 0.01

    def test_determinism(self):
        a = sample_factor(gauss_spec(), 10_000, seed=3)
        b = sample_factor(gauss_spec(), 10_000, seed=3)
        np.testing.assert_array_equal(a.values, b.values)

    def test_thread_invariance(self):
        a = sample_factor(gauss_spec(), 30_000, seed=3, n_threads=1)
        b = sample_factor(gauss_spec(), 30_000, seed=3, n_threads=4)
        np.testing.assert_array_equal(a.values, b.values)

    def test_tarch_factor_skew_and_kurtosis(self):
        spec = FactorModelSpec.from_rho(TarchFactor(FIG1), 0.3, horizon_steps=260)
        sample = sample_factor(spec, 50_000, seed=2)
        v = sample.values
        assert (v**3).mean() < -0.2
        assert (v**4).mean() > 3.2

    def test_mixing_factor_has_no_scalar_sample(self):
        spec = FactorModelSpec.from_rho(StudentTMixingFactor(12.0), 0.3)
        with pytest.raises(DomainError):
            sample_factor(spec, 100, seed=0)


class TestCalibration:
    def test_no_factor_dependence(self):
        sample = sample_factor(gauss_spec(), 20_000, seed=5)
        d = calibrate_threshold(sample, 0.0, None, 0.0961)
        assert d == pytest.approx(ndtri(0.0961), abs=1e-9)

    def test_gaussian_static_threshold_near_quantile(self):
        sample = sample_factor(gauss_spec(), 200_000, seed=6)
        d = calibrate_threshold(sample, B03, None, 0.0961)
        assert d == pytest.approx(ndtri(0.0961), abs=0.02)

    def test_postcondition(self):
        spec = FactorModelSpec.from_rho(TarchFactor(FIG1), 0.3, horizon_steps=52)
        sample = sample_factor(spec, 50_000, seed=7)
        d = calibrate_threshold(sample, B03, None, 0.0961)
        achieved = idio_cdf((d - B03 * sample.values) / math.sqrt(0.7), None).mean()
        assert abs(achieved - 0.0961) < 1e-10

    def test_student_t_idio_postcondition(self):
        sample = sample_factor(gauss_spec(), 50_000, seed=8)
        d = calibrate_threshold(sample, B03, 12.0, 0.05)
        achieved = idio_cdf((d - B03 * sample.values) / math.sqrt(0.7), 12.0).mean()
        assert abs(achieved - 0.05) < 1e-10

    def test_domain(self):
        sample = sample_factor(gauss_spec(), 1000, seed=8)
        with pytest.raises(DomainError):
            calibrate_threshold(sample, 1.0, None, 0.05)
        with pytest.raises(DomainError):
            calibrate_threshold(sample, 0.5, None, 0.0)


class TestLhpLosses:
    def test_no_loading_is_deterministic(self):
        sample = sample_factor(gauss_spec(), 5_000, seed=9)
        d = calibrate_threshold(sample, 0.0, None, 0.0961)
        ls = lhp_losses(sample, 0.0, None, d, recovery=0.4)
        np.testing.assert_allclose(ls.losses, 0.6 * 0.0961, atol=1e-9)

    def test_comonotone_limit(self):
        p = 0.0961
        sample = sample_factor(gauss_spec(), 200_000, seed=10)
        b = 0.99995
        d = calibrate_threshold(sample, b, None, p)
        ls = lhp_losses(sample, b, None, d, recovery=0.4)
        near_full = (ls.losses > 0.3).mean()
        near_zero = (ls.losses < 0.3).mean()
        assert near_full == pytest.approx(p, abs=0.01)
        assert near_zero == pytest.approx(1 - p, abs=0.01)

    def test_mean_loss(self):
        p = 0.0961
        sample = sample_factor(gauss_spec(), 100_000, seed=11)
        d = calibrate_threshold(sample, B03, None, p)
        ls = lhp_losses(sample, B03, None, d, recovery=0.4)
        # calibration pins the mean conditional probability, so this is exact
        assert ls.mean_loss() == pytest.approx(0.6 * p, abs=1e-9)

    def test_support(self):
        spec = FactorModelSpec.from_rho(TarchFactor(FIG1), 0.3, horizon_steps=52)
        sample = sample_factor(spec, 30_000, seed=12)
        d = calibrate_threshold(sample, B03, 12.0, 0.05)
        ls = lhp_losses(sample, B03, 12.0, d, recovery=0.4)
        assert np.all(ls.losses >= 0.0)
        assert np.all(ls.losses <= 0.6)


@pytest.fixture(scope="module")
def gaussian_losses():
    engine = LossEngine(gauss_spec(recovery=0.4), 200_000, seed=13)
    return engine.losses(0.0961)


class TestTrancheLoss:

    def test_full_detachment_equals_mean(self, gaussian_losses):
        assert expected_tranche_loss_mc(gaussian_losses, 0.6) == pytest.approx(
            gaussian_losses.mean_loss(), abs=1e-15
        )

    def test_matches_closed_form(self, gaussian_losses):
        n = len(gaussian_losses.losses)
        for k in (0.01, 0.03, 0.07, 0.15, 0.3):
            mc = expected_tranche_loss_mc(gaussian_losses, k)
            pay = np.minimum(gaussian_losses.losses, k)
            se = pay.std() / math.sqrt(n)
            assert abs(mc - expected_equity_loss(k, 0.0961, 0.4, 0.3)) < 3 * se

    def test_payoff_capped_by_detachment(self, gaussian_losses):
        assert expected_tranche_loss_mc(gaussian_losses, 0.001) <= 0.001

    def test_curve_matches_direct_means(self, gaussian_losses):
        ks = np.array([0.005, 0.02, 0.1, 0.45])
        curve = equity_loss_curve(gaussian_losses, ks)
        direct = [np.minimum(gaussian_losses.losses, k).mean() for k in ks]
        np.testing.assert_allclose(curve, direct, rtol=1e-12)

    def test_curve_monotone_concave(self, gaussian_losses):
        ks = np.arange(0.005, 0.4, 0.005)
        curve = equity_loss_curve(gaussian_losses, ks)
        diffs = np.diff(curve)
        assert np.all(diffs >= 0.0)
        assert np.all(np.diff(diffs) <= 1e-15)


class TestDefaultCorr:
    def test_no_loading_zero(self):
        spec = FactorModelSpec(factor=GaussianFactor(), loading=0.0)
        curve = default_corr_mc(spec, [0.01, 0.05, 0.2], n_paths=5_000, seed=1)
        np.testing.assert_allclose(curve.estimate, 0.0, atol=1e-12)

    def test_gaussian_matches_closed_form(self):
        curve = default_corr_mc(gauss_spec(), [0.05], n_paths=10_000, seed=2, n_reps=40)
        expect = gaussian_default_corr(0.05, 0.3)
        assert curve.lower[0] < expect < curve.upper[0]
        assert curve.estimate[0] == pytest.approx(expect, abs=0.01)

    def test_range_and_shape(self):
        spec = FactorModelSpec.from_rho(TarchFactor(FIG1), 0.3, horizon_steps=52, idio_nu=12.0)
        curve = default_corr_mc(spec, [0.01, 0.05, 0.2, 0.5], n_paths=10_000, seed=3, n_reps=5)
        assert np.all(curve.rep_values >= 0.0)
        assert np.all(curve.rep_values <= 1.0)

    def test_rep_streams_independent_of_rep_count(self):
        few = default_corr_mc(gauss_spec(), [0.05], n_paths=4_000, seed=4, n_reps=2)
        more = default_corr_mc(gauss_spec(), [0.05], n_paths=4_000, seed=4, n_reps=5)
        np.testing.assert_array_equal(few.rep_values, more.rep_values[:2])

    def test_mixing_model_dispatch(self):
        spec = FactorModelSpec.from_rho(StudentTMixingFactor(12.0), 0.3)
        curve = default_corr_mc(spec, [0.05], n_paths=20_000, seed=5, n_reps=3)
        # fat joint tails: above the Gaussian value
        assert curve.estimate[0] > gaussian_default_corr(0.05, 0.3)
