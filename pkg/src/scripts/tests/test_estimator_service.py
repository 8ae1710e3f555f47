from src.models.evalue import IntervalMethod
from src.models.missing_data import BenchmarkPair, MissingDataBatch, MissingDataSample
from src.services.estimator_service import (
    NULL_FALLBACK_WARNING,
    check_group_alignment,
    complete_case_mean,
    ipw_mean,
    ipw_variance_poisson,
    ipw_variance_taylor,
    outcome_summary,
    poisson_sampling_interval,
    sensitivity_pairs,
    taylor_series_interval,
)
from src.services.evalue_service import evalue_from_rr
from src.utils.errors import ApproximationWarning, DataError
from src.utils.seeding import make_rng
import math
import numpy as np
import pytest


@pytest.fixture
def tiny_batch():
    return MissingDataBatch(y=[2.0, 4.0, 6.0, float("nan")], r=[1, 1, 1, 0], pi=[0.5, 0.5, 1.0, 0.5])


def test_ipw_mean_by_hand(tiny_batch):
    assert ipw_mean(tiny_batch) == pytest.approx(4.5)


def test_ipw_mean_accepts_sample_lists(tiny_batch):
    assert ipw_mean(tiny_batch.to_samples()) == pytest.approx(4.5)


def test_complete_case_mean(tiny_batch):
    assert complete_case_mean(tiny_batch) == pytest.approx(4.0)


def test_variances_by_hand(tiny_batch):
    assert ipw_variance_taylor(tiny_batch) == pytest.approx(35.0 / 16.0)
    assert ipw_variance_poisson(tiny_batch) == pytest.approx(40.0 / 16.0)


def test_no_observed_outcomes():
    batch = MissingDataBatch(y=[1.0, 2.0], r=[0, 0], pi=[0.5, 0.5])
    with pytest.raises(DataError, match="no observed outcomes"):
        ipw_mean(batch)


def test_ipw_mean_is_unbiased_under_known_propensities():
    rng = make_rng(3, 0)
    n = 200_000
    pi = rng.uniform(0.2, 1.0, size=n)
    y = rng.normal(5.0, 1.0, size=n)
    r = (rng.random(n) < pi).astype(int)
    batch = MissingDataBatch(y=y, r=r, pi=pi)
    assert ipw_mean(batch) == pytest.approx(5.0, abs=0.06)


def test_outcome_summary_weighted_spread(tiny_batch):
    summary = outcome_summary(tiny_batch)
    assert summary.p_obs == pytest.approx(0.75)
    assert summary.sd_y == pytest.approx(math.sqrt(2.24))
    assert summary.n == 4


def test_outcome_summary_rejects_constant_outcomes():
    batch = MissingDataBatch(y=[3.0, 3.0, 3.0, 0.0], r=[1, 1, 1, 0], pi=[0.5, 0.5, 1.0, 0.5])
    with pytest.raises(DataError, match="degenerate outcome variance"):
        outcome_summary(batch)


def test_outcome_summary_needs_two_observed():
    batch = MissingDataBatch(y=[3.0, 0.0], r=[1, 0], pi=[0.5, 0.5])
    with pytest.raises(DataError, match="at least 2"):
        outcome_summary(batch)


def test_group_alignment_reports_both_sides():
    benchmarks = [
        BenchmarkPair(group_id="purchase", mu_source1=1.0, mu_source2=1.1),
        BenchmarkPair(group_id="lead", mu_source1=1.0, mu_source2=1.1),
    ]
    with pytest.raises(DataError) as excinfo:
        check_group_alignment(["purchase", "search"], benchmarks)
    message = excinfo.value.message
    assert message.startswith("mismatched group sets")
    assert "no benchmark for groups: search" in message
    assert "no estimate for groups: lead" in message


def test_group_alignment_rejects_duplicates():
    benchmarks = [BenchmarkPair(group_id="lead", mu_source1=1.0, mu_source2=1.1)] * 2
    with pytest.raises(DataError, match="duplicate benchmark groups: lead"):
        check_group_alignment(["lead"], benchmarks)


def test_sensitivity_pairs_follow_benchmark_order():
    means = {"a": 1.0, "b": 2.0, "c": 3.0}
    benchmarks = [
        BenchmarkPair(group_id="c", mu_source1=2.5, mu_source2=3.5),
        BenchmarkPair(group_id="a", mu_source1=0.75, mu_source2=1.25),
        BenchmarkPair(group_id="b", mu_source1=2.0, mu_source2=1.0),
    ]
    pairs = sensitivity_pairs(means, benchmarks)
    assert pairs.rows == ((0.5, -0.5), (0.25, -0.25), (0.0, 1.0))


class TestAsymptoticIntervals:
    def test_null_point_estimate_falls_back(self, unit_batch):
        summary = outcome_summary(unit_batch)
        with pytest.warns(ApproximationWarning, match="null point estimate"):
            interval = taylor_series_interval(unit_batch, summary, 0.95, 0.0)
        assert interval.lower == 1.0
        assert interval.upper > 1.0
        assert interval.warning == NULL_FALLBACK_WARNING
        assert interval.method == IntervalMethod.TAYLOR

    def test_interval_contains_point_evalue(self, unit_batch):
        summary = outcome_summary(unit_batch)
        delta_hat = 0.3
        point = evalue_from_rr(math.exp(0.91 * (1.0 - summary.p_obs) * delta_hat / summary.sd_y))
        for builder in (taylor_series_interval, poisson_sampling_interval):
            interval = builder(unit_batch, summary, 0.95, delta_hat)
            assert interval.lower >= 1.0
            assert interval.contains(point)
            assert interval.warning is None

    def test_width_shrinks_with_sample_size(self, unit_batch):
        summary = outcome_summary(unit_batch)
        index = np.tile(np.arange(unit_batch.n), 9)
        bigger = unit_batch.take(index)
        for builder in (taylor_series_interval, poisson_sampling_interval):
            small = builder(unit_batch, summary, 0.95, 0.3)
            large = builder(bigger, summary, 0.95, 0.3)
            assert large.width < small.width

    def test_higher_level_is_wider(self, unit_batch):
        summary = outcome_summary(unit_batch)
        narrow = poisson_sampling_interval(unit_batch, summary, 0.8, 0.3)
        wide = poisson_sampling_interval(unit_batch, summary, 0.99, 0.3)
        assert wide.upper > narrow.upper

    def test_accepts_sample_lists(self):
        samples = [MissingDataSample(y=float(v), r=1, pi=0.5) for v in (1.0, 2.0, 4.0)]
        samples.append(MissingDataSample(y=0.0, r=0, pi=0.5))
        summary = outcome_summary(samples)
        interval = taylor_series_interval(samples, summary, 0.95, 0.5)
        assert interval.upper >= interval.lower >= 1.0


class TestEstimatorProperties:
    def test_ipw_mean_ignores_unit_order(self, unit_batch):
        order = make_rng(5, 0).permutation(unit_batch.n)
        assert ipw_mean(unit_batch.take(order)) == pytest.approx(ipw_mean(unit_batch), rel=1e-12)

    def test_ipw_mean_is_plain_mean_under_full_response(self):
        y = make_rng(6, 0).normal(2.0, 1.0, size=50)
        batch = MissingDataBatch(y=y, r=np.ones(50, dtype=int), pi=np.ones(50))
        assert ipw_mean(batch) == pytest.approx(float(np.mean(y)), rel=1e-12)

    def test_ipw_mean_matches_summation_loop(self):
        rng = make_rng(8, 0)
        pi = rng.uniform(0.1, 1.0, size=50)
        r = (rng.random(50) < pi).astype(int)
        y = rng.lognormal(1.0, 0.5, size=50)
        total = 0.0
        for yi, ri, pii in zip(y, r, pi):
            if ri == 1:
                total += yi / pii
        assert ipw_mean(MissingDataBatch(y=y, r=r, pi=pi)) == pytest.approx(total / 50, rel=1e-12)

    def test_sensitivity_pairs_match_subtraction_loop(self):
        rng = make_rng(9, 0)
        names = [f"event_{j}" for j in range(15)]
        means = {name: float(v) for name, v in zip(names, rng.normal(3.0, 0.5, size=15))}
        benchmarks = [
            BenchmarkPair(group_id=name, mu_source1=float(a), mu_source2=float(b))
            for name, a, b in zip(names, rng.normal(3.0, 0.5, size=15), rng.normal(3.0, 0.5, size=15))
        ]
        pairs = sensitivity_pairs(means, benchmarks)
        assert pairs.m == 15
        for row, bench in zip(pairs.rows, benchmarks):
            assert row[0] == means[bench.group_id] - bench.mu_source1
            assert row[1] == means[bench.group_id] - bench.mu_source2


class TestDegenerateIntervals:
    def test_census_gives_point_interval(self, summary):
        batch = MissingDataBatch(y=[1.0, 2.0, 4.0, 7.0], r=[1, 1, 1, 1], pi=[1.0, 1.0, 1.0, 1.0])
        assert ipw_variance_poisson(batch) == 0.0
        interval = poisson_sampling_interval(batch, summary, 0.95, 0.3)
        point = evalue_from_rr(math.exp(0.91 * (1.0 - summary.p_obs) * 0.3 / summary.sd_y))
        assert interval.lower == pytest.approx(point, rel=1e-12)
        assert interval.upper == interval.lower
        assert interval.width == 0.0

    def test_near_null_estimate_falls_back_with_warning(self, unit_batch):
        summary = outcome_summary(unit_batch)
        with pytest.warns(ApproximationWarning, match="null point estimate"):
            exact = taylor_series_interval(unit_batch, summary, 0.95, 0.0)
        with pytest.warns(ApproximationWarning, match="null point estimate"):
            near = taylor_series_interval(unit_batch, summary, 0.95, 1e-9)
        assert near.lower == 1.0
        assert math.isfinite(near.upper)
        assert near.upper == pytest.approx(exact.upper, rel=1e-12)
        assert near.warning == NULL_FALLBACK_WARNING
