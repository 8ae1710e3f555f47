from src.models.evalue import Branch, DensityVariant, EvalueDensityParams, IntervalMethod
from src.models.posterior import GeneralizedT
from src.services.density_service import (
    GAMMA_RATE_CONVENTION,
    branch_probabilities,
    cdf,
    closed_form_interval,
    density,
    params_from_posterior,
    params_known_fraction,
    params_random_fraction,
    params_random_scale,
    quantile,
    resolve_gamma_rate_convention,
    total_density,
    total_mass,
)
from src.services.evalue_service import evalue_from_rr
from src.utils.errors import ApproximationWarning, ValidationError
from src.utils.seeding import make_rng
from scipy import integrate, stats
import math
import numpy as np
import pytest


def normal_params(mu, sigma):
    return EvalueDensityParams(variant=DensityVariant.KNOWN_FRACTION, mu_rr=mu, sigma_rr=sigma)


def sup_distance(log_rr_draws, params):
    v = np.asarray(evalue_from_rr(np.exp(log_rr_draws)))
    v = v[v > 1.0]
    return stats.kstest(v, lambda x: cdf(params, x)).statistic


class TestKnownFraction:
    def test_params(self):
        params = params_known_fraction(eta=0.2, tau=0.05, p_obs=0.25, sd_y=1.5)
        assert params.mu_rr == pytest.approx(0.91 * 0.75 * 0.2 / 1.5)
        assert params.sigma_rr == pytest.approx(0.91 * 0.75 * 0.05 / 1.5)

    def test_cdf_at_ten(self):
        assert cdf(normal_params(0.0, 1.0), 10.0) == pytest.approx(
            2.0 * stats.norm.cdf(math.log(100.0 / 19.0)) - 1.0, rel=1e-12
        )

    def test_median_of_symmetric_effect(self):
        expected = evalue_from_rr(math.exp(stats.norm.ppf(0.75)))
        assert quantile(normal_params(0.0, 1.0), 0.5) == pytest.approx(expected, rel=1e-9)
        assert expected == pytest.approx(3.338, abs=1e-3)

    @pytest.mark.parametrize("v", [1.05, 1.2, 3.0, 10.0, 40.0])
    def test_quantile_inverts_cdf(self, v):
        params = normal_params(0.3, 0.7)
        assert quantile(params, cdf(params, v)) == pytest.approx(v, rel=1e-8)

    def test_total_and_branch_mass(self):
        params = normal_params(0.3, 0.5)
        assert total_mass(params) == pytest.approx(1.0, abs=1e-6)
        upper, lower = branch_probabilities(params)
        assert upper + lower == pytest.approx(1.0)
        assert upper == pytest.approx(1.0 - stats.norm.cdf(-0.6), abs=1e-12)
        v_max = 200.0
        mass, _ = integrate.quad(lambda v: density(params, v, Branch.RR_GT_1), 1.0, v_max, points=[1.5, 3.0, 10.0, 30.0], limit=500)
        assert mass == pytest.approx(upper, abs=1e-6)

    def test_cdf_limits_and_monotone(self):
        params = normal_params(0.1, 0.4)
        grid = np.geomspace(1.0 + 1e-9, 1e4, 400)
        values = cdf(params, grid)
        assert values[0] < 1e-6
        assert values[-1] > 1.0 - 1e-9
        assert np.all(np.diff(values) >= 0.0)
        assert np.all(total_density(params, grid) >= 0.0)

    def test_support(self):
        with pytest.raises(ValidationError, match="v > 1"):
            cdf(normal_params(0.0, 1.0), 1.0)

    def test_matches_simulation(self):
        params = normal_params(0.2, 0.3)
        draws = make_rng(1, 0).normal(0.2, 0.3, 200_000)
        assert sup_distance(draws, params) < 0.01

    def test_closed_form_interval(self):
        centered = closed_form_interval(normal_params(0.0, 0.1), 0.95)
        assert centered.lower == 1.0
        assert centered.method == IntervalMethod.CLOSED_FORM
        shifted = closed_form_interval(normal_params(3.0, 0.1), 0.95)
        assert shifted.lower > 1.0
        assert cdf(normal_params(3.0, 0.1), shifted.upper) - cdf(normal_params(3.0, 0.1), shifted.lower) == pytest.approx(0.95, abs=1e-9)

    def test_from_posterior(self, summary):
        params = params_from_posterior(GeneralizedT(location=0.05, scale=0.01, df=20.0), summary)
        assert params.variant == DensityVariant.KNOWN_FRACTION
        assert params.sigma_rr == pytest.approx(0.91 * 0.9 / 1.1 * 0.01 * math.sqrt(20.0 / 18.0))
        with pytest.raises(ValidationError):
            params_from_posterior(GeneralizedT(location=0.05, scale=0.01, df=2.0), summary)


class TestRandomFraction:
    def test_matches_simulation(self):
        eta, tau, mu_q, sigma_q, sd_y = 1.0, 0.05, 0.5, 0.02, 2.0
        params = params_random_fraction(eta, tau, mu_q, sigma_q, sd_y)
        rng = make_rng(2, 0)
        q = rng.normal(mu_q, sigma_q, 200_000)
        delta = rng.normal(eta, tau, 200_000)
        assert sup_distance(0.91 * q * delta / sd_y, params) < 0.01

    def test_large_ratio_warns(self):
        with pytest.warns(ApproximationWarning, match="sigma_q / mu_q"):
            params_random_fraction(1.0, 0.05, 0.2, 0.1, 1.0)

    def test_zero_mean_rejected(self):
        with pytest.raises(ValidationError, match="nonzero"):
            params_random_fraction(0.0, 0.05, 0.2, 0.01, 1.0)


class TestRandomScale:
    def test_rate_convention_resolved_by_simulation(self):
        best, distances = resolve_gamma_rate_convention(n_draws=200_000)
        assert best == GAMMA_RATE_CONVENTION == "reciprocal"
        assert distances["reciprocal"] < 0.01
        assert distances["direct"] > 0.5

    def test_negative_effect_rejected(self):
        with pytest.raises(ValidationError, match="positive effect direction"):
            params_random_scale(-1.0, 0.01, 0.2, 0.002, 3.0, 2.0)

    def test_lower_branch_is_empty(self):
        params = params_random_scale(1.0, 0.01, 0.2, 0.002, 3.0, 2.0)
        assert branch_probabilities(params) == (1.0, 0.0)
        with pytest.warns(ApproximationWarning, match="experimental"):
            assert density(params, 1.5, Branch.RR_LT_1) == 0.0
        assert total_mass(params) == pytest.approx(1.0, abs=1e-6)

    def test_concentrates_as_shape_grows(self):
        eta, mu_q, sd_y = 1.0, 0.2, 2.0
        alpha = 1e4
        params = params_random_scale(eta, 0.01, mu_q, 0.002, alpha, alpha * sd_y)
        target = evalue_from_rr(math.exp(0.91 * mu_q * eta / sd_y))
        assert quantile(params, 0.5) == pytest.approx(target, rel=1e-3)
        interval = closed_form_interval(params, 0.95)
        assert interval.width < closed_form_interval(params_random_scale(eta, 0.01, mu_q, 0.002, 10.0, 10.0 * sd_y), 0.95).width


KNOWN_GRID = [(mu, sigma) for mu in (-1.5, -0.5, 0.0, 0.5, 1.5) for sigma in (0.05, 0.2, 0.5, 1.0)]
FRACTION_GRID = [(eta, sd_y) for eta in (-1.0, -0.3, 0.3, 1.0, 2.0) for sd_y in (0.8, 1.5, 3.0, 6.0)]
SCALE_GRID = [(alpha, mean) for alpha in (1.5, 3.0, 6.0, 12.0, 25.0) for mean in (0.05, 0.3, 1.0, 3.0)]


class TestDensityIdentities:
    @pytest.mark.parametrize("mu, sigma", KNOWN_GRID)
    def test_known_fraction_mass(self, mu, sigma):
        assert total_mass(normal_params(mu, sigma)) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("eta, sd_y", FRACTION_GRID)
    def test_random_fraction_mass(self, eta, sd_y):
        params = params_random_fraction(eta, 0.1 * abs(eta), 0.5, 0.02, sd_y)
        assert total_mass(params) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("alpha, mean", SCALE_GRID)
    def test_random_scale_mass(self, alpha, mean):
        params = EvalueDensityParams(variant=DensityVariant.RANDOM_SCALE, alpha=alpha, beta_v=alpha / mean)
        assert total_mass(params) == pytest.approx(1.0, abs=1e-6)

    def test_change_of_variables(self):
        params = normal_params(0.0, 1.0)
        v = np.linspace(1.02, 25.0, 50)
        expected = 2.0 * stats.norm.pdf(np.log(v ** 2 / (2.0 * v - 1.0))) * (1.0 / v - 1.0 / (v * (2.0 * v - 1.0)))
        # both branches coincide for a centered effect
        np.testing.assert_allclose(total_density(params, v), expected, rtol=1e-12)
        np.testing.assert_allclose(density(params, v, Branch.RR_GT_1), expected / 2.0, rtol=1e-12)

    def test_fixed_fraction_reduces_to_known_fraction(self):
        eta, tau, mu_q, sd_y = 0.5, 0.05, 0.4, 1.3
        fixed = params_random_fraction(eta, tau, mu_q, 0.0, sd_y)
        known = params_known_fraction(eta, tau, 1.0 - mu_q, sd_y)
        assert fixed.mu_rr == pytest.approx(known.mu_rr, rel=1e-12)
        assert fixed.sigma_rr == pytest.approx(known.sigma_rr, rel=1e-12)
        v = np.geomspace(1.01, 20.0, 30)
        np.testing.assert_allclose(cdf(fixed, v), cdf(known, v), rtol=1e-10, atol=1e-14)

    def test_heavy_tail_is_clamped(self):
        params = EvalueDensityParams(variant=DensityVariant.RANDOM_SCALE, alpha=2.0, beta_v=0.01)
        with pytest.warns(ApproximationWarning, match="not integrated"):
            mass = total_mass(params)
        assert math.isfinite(mass)
        assert mass == pytest.approx(stats.gamma.cdf(300.0, 2.0, scale=100.0), rel=1e-6)
