from src.config.worker_pool import WorkerPool
from src.models.posterior import GeneralizedT
from src.models.sensitivity import SensitivityPairs
from src.services.posterior_service import (
    DRAW_CHUNK,
    _student_t,
    objective_kernel,
    objective_posterior,
    sample_delta,
    subjective_kernel,
    subjective_posterior,
)
from src.services.prior_fit_service import fit_hyperparams
from src.utils.errors import DataError, ValidationError
from scipy import stats
import numpy as np
import pytest


def assert_proportional(density, kernel, rtol=1e-8):
    ratio = density / kernel
    np.testing.assert_allclose(ratio, ratio[0], rtol=rtol)


class TestPosteriors:
    def test_subjective_matches_kernel(self, canonical_pairs):
        hyper = fit_hyperparams(canonical_pairs)
        post = subjective_posterior(canonical_pairs, hyper)
        grid = post.location + post.scale * np.linspace(-6.0, 6.0, 41)
        assert_proportional(post.pdf(grid), subjective_kernel(grid, canonical_pairs, hyper))

    def test_subjective_with_given_hyperparams(self, small_pairs, hyper):
        post = subjective_posterior(small_pairs, hyper)
        assert post.df == small_pairs.m + hyper.nu - 1.0
        grid = post.location + post.scale * np.linspace(-6.0, 6.0, 41)
        assert_proportional(post.pdf(grid), subjective_kernel(grid, small_pairs, hyper))

    def test_objective_matches_kernel(self, canonical_pairs):
        post = objective_posterior(canonical_pairs)
        assert post.df == canonical_pairs.m - 1.0
        grid = post.location + post.scale * np.linspace(-6.0, 6.0, 41)
        assert_proportional(post.pdf(grid), objective_kernel(grid, canonical_pairs))

    def test_objective_has_heavier_tails(self, canonical_pairs):
        hyper = fit_hyperparams(canonical_pairs)
        assert objective_posterior(canonical_pairs).df < subjective_posterior(canonical_pairs, hyper).df

    def test_non_normalizable_kernel(self):
        with pytest.raises(DataError, match="not normalizable"):
            _student_t(u=0.0, z=1.0, w=-2.0, weight=1.0, df=5.0)

    def test_degrees_of_freedom_must_exceed_one(self):
        with pytest.raises(DataError):
            _student_t(u=0.0, z=1.0, w=1.0, weight=1.0, df=1.0)


class TestPosteriorInvariances:
    def test_kernel_ratio_is_constant(self, canonical_pairs, hyper):
        for post, kernel in [
            (objective_posterior(canonical_pairs), lambda x: objective_kernel(x, canonical_pairs)),
            (subjective_posterior(canonical_pairs, hyper), lambda x: subjective_kernel(x, canonical_pairs, hyper)),
        ]:
            grid = post.location + post.scale * np.linspace(-4.0, 4.0, 100)
            ratio = post.pdf(grid) / kernel(grid)
            assert np.std(ratio) / np.mean(ratio) < 1e-10

    @pytest.mark.parametrize("shift, factor", [(0.3, 1.0), (-0.02, 2.5), (1.0, -0.5)])
    def test_objective_location_is_affine_equivariant(self, canonical_pairs, shift, factor):
        base = objective_posterior(canonical_pairs)
        moved = objective_posterior(SensitivityPairs(rows=shift + factor * canonical_pairs.as_array()))
        assert moved.location == pytest.approx(shift + factor * base.location, rel=1e-10, abs=1e-12)
        assert moved.scale == pytest.approx(abs(factor) * base.scale, rel=1e-10)
        assert moved.df == base.df


class TestSampling:
    def test_draws_follow_the_posterior(self):
        post = GeneralizedT(location=0.01, scale=0.02, df=15.0)
        draws = sample_delta(post, 100_000, seed=42)
        assert stats.kstest(draws, post.cdf).statistic < 0.006

    def test_same_seed_same_draws(self):
        post = GeneralizedT(location=0.0, scale=1.0, df=5.0)
        np.testing.assert_array_equal(sample_delta(post, 1000, seed=1), sample_delta(post, 1000, seed=1))
        assert not np.array_equal(sample_delta(post, 1000, seed=1), sample_delta(post, 1000, seed=1, stream=1))

    def test_prefix_stable_across_draw_counts(self):
        post = GeneralizedT(location=0.0, scale=1.0, df=5.0)
        short = sample_delta(post, 500, seed=3)
        long = sample_delta(post, DRAW_CHUNK + 500, seed=3)
        np.testing.assert_array_equal(short, long[:500])

    def test_independent_of_thread_count(self):
        post = GeneralizedT(location=0.0, scale=1.0, df=5.0)
        n = 2 * DRAW_CHUNK + 17
        serial = sample_delta(post, n, seed=9)
        WorkerPool.start(4)
        threaded = sample_delta(post, n, seed=9)
        np.testing.assert_array_equal(serial, threaded)
        assert serial.shape == (n,)

    def test_rejects_empty_request(self):
        with pytest.raises(ValidationError):
            sample_delta(GeneralizedT(location=0.0, scale=1.0, df=5.0), 0, seed=1)
