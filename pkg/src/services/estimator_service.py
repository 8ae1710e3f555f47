from src.models.evalue import EvalueInterval, IntervalMethod
from src.models.missing_data import BenchmarkPair, MissingDataBatch, MissingDataSample, OutcomeSummary
from src.models.sensitivity import SensitivityPairs
from src.services.evalue_service import (
    RR_CONVERSION,
    evalue_from_rr,
    evalue_slope,
    rr_from_effect,
    standardized_effect,
)
from src.utils.errors import ApproximationWarning, DataError, ValidationError
from scipy import stats
from typing import Iterable, Mapping, Sequence, Union
import logging
import math
import warnings
import numpy as np

logger = logging.getLogger(__name__)

Samples = Union[MissingDataBatch, Sequence[MissingDataSample]]

NULL_FALLBACK_WARNING = "null point estimate: one-sided fallback interval"
# |log RR| below this counts as null; the E-value slope diverges at RR = 1
NEAR_NULL_LOG_RR = 1e-6


def as_batch(samples: Samples) -> MissingDataBatch:
    if isinstance(samples, MissingDataBatch):
        return samples
    return MissingDataBatch.from_samples(list(samples))


def _weighted_terms(batch: MissingDataBatch) -> np.ndarray:
    """R_i * Y_i / pi_i, with unobserved outcomes never read."""
    observed = batch.r == 1
    return np.where(observed, np.where(observed, batch.y, 0.0) / batch.pi, 0.0)


def _require_observed(batch: MissingDataBatch, minimum: int = 1):
    if batch.n == 0 or batch.n_observed < minimum:
        if minimum == 1:
            raise DataError("no observed outcomes")
        raise DataError(f"at least {minimum} observed outcomes are required, got {batch.n_observed}")


def ipw_mean(samples: Samples) -> float:
    """Horvitz-Thompson mean n^-1 sum R_i Y_i / pi_i."""
    batch = as_batch(samples)
    _require_observed(batch)
    return float(np.sum(_weighted_terms(batch)) / batch.n)


def complete_case_mean(samples: Samples) -> float:
    batch = as_batch(samples)
    _require_observed(batch)
    return float(np.mean(batch.y[batch.r == 1]))


def ipw_variance_taylor(samples: Samples) -> float:
    """Linearized variance of the IPW mean: n^-2 sum (R_i Y_i / pi_i - mu)^2."""
    batch = as_batch(samples)
    _require_observed(batch)
    terms = _weighted_terms(batch)
    mean = np.sum(terms) / batch.n
    return float(np.sum((terms - mean) ** 2) / batch.n ** 2)


def ipw_variance_poisson(samples: Samples) -> float:
    """Horvitz-Thompson variance under Poisson sampling: n^-2 sum R_i (1 - pi_i) (Y_i / pi_i)^2."""
    batch = as_batch(samples)
    _require_observed(batch)
    terms = _weighted_terms(batch)
    return float(np.sum((1.0 - batch.pi) * terms ** 2) / batch.n ** 2)


def outcome_summary(samples: Samples) -> OutcomeSummary:
    """Observed fraction and the inverse-propensity weighted sd of the observed outcomes."""
    batch = as_batch(samples)
    _require_observed(batch, minimum=2)
    observed = batch.r == 1
    y = batch.y[observed]
    weights = 1.0 / batch.pi[observed]
    center = np.sum(weights * y) / np.sum(weights)
    variance = np.sum(weights * (y - center) ** 2) / np.sum(weights)
    sd_y = float(math.sqrt(variance))
    if not sd_y > 0.0:
        raise DataError("degenerate outcome variance")
    try:
        return OutcomeSummary(p_obs=batch.n_observed / batch.n, sd_y=sd_y, n=batch.n)
    except ValueError as e:
        logger.error(f"Outcome summary rejected: {str(e)}")
        raise DataError(str(e))


def check_group_alignment(group_ids: Iterable[str], benchmarks: Sequence[BenchmarkPair]):
    """Estimates and benchmarks must cover the same groups, each benchmark once."""
    group_ids = set(group_ids)
    bench_ids = [b.group_id for b in benchmarks]
    duplicates = sorted({g for g in bench_ids if bench_ids.count(g) > 1})
    if duplicates:
        raise DataError(f"duplicate benchmark groups: {', '.join(duplicates)}")
    missing_bench = sorted(group_ids - set(bench_ids))
    missing_means = sorted(set(bench_ids) - group_ids)
    if missing_bench or missing_means:
        parts = []
        if missing_bench:
            parts.append(f"no benchmark for groups: {', '.join(missing_bench)}")
        if missing_means:
            parts.append(f"no estimate for groups: {', '.join(missing_means)}")
        logger.error(f"Group mismatch between estimates and benchmarks: {'; '.join(parts)}")
        raise DataError("mismatched group sets: " + "; ".join(parts))


def sensitivity_pairs(ipw_means: Mapping[str, float], benchmarks: Sequence[BenchmarkPair]) -> SensitivityPairs:
    """Row j = (mu_hat_j - source1_j, mu_hat_j - source2_j), in benchmark order."""
    check_group_alignment(ipw_means, benchmarks)
    rows = [
        (ipw_means[b.group_id] - b.mu_source1, ipw_means[b.group_id] - b.mu_source2)
        for b in benchmarks
    ]
    try:
        return SensitivityPairs(rows=rows)
    except ValueError as e:
        raise DataError(str(e))


def _delta_method_interval(
    delta_hat: float,
    variance: float,
    summary: OutcomeSummary,
    level: float,
    method: IntervalMethod,
) -> EvalueInterval:
    if not (0.0 < level < 1.0):
        raise ValidationError(f"level must lie in (0, 1), got {level}")
    if not (math.isfinite(variance) and variance >= 0.0):
        raise DataError(f"sampling variance must be finite and >= 0, got {variance}")
    z = float(stats.norm.ppf(0.5 + level / 2.0))
    mu = standardized_effect(delta_hat, summary)
    se_mu = standardized_effect(math.sqrt(variance), summary)
    rr = rr_from_effect(mu)
    if abs(RR_CONVERSION * mu) < NEAR_NULL_LOG_RR:
        upper = 1.0 + z * (evalue_from_rr(rr_from_effect(se_mu)) - 1.0)
        logger.warning(f"{method.value}: {NULL_FALLBACK_WARNING}")
        warnings.warn(NULL_FALLBACK_WARNING, ApproximationWarning, stacklevel=3)
        return EvalueInterval(lower=1.0, upper=upper, method=method, level=level, warning=NULL_FALLBACK_WARNING)
    v_hat = evalue_from_rr(rr)
    sigma_v = evalue_slope(rr) * RR_CONVERSION * se_mu
    return EvalueInterval(
        lower=max(1.0, v_hat - z * sigma_v),
        upper=v_hat + z * sigma_v,
        method=method,
        level=level,
    )


def taylor_series_interval(
    samples: Samples, summary: OutcomeSummary, level: float, delta_hat: float
) -> EvalueInterval:
    """Delta-method E-value interval with the linearized IPW variance."""
    return _delta_method_interval(delta_hat, ipw_variance_taylor(samples), summary, level, IntervalMethod.TAYLOR)


def poisson_sampling_interval(
    samples: Samples, summary: OutcomeSummary, level: float, delta_hat: float
) -> EvalueInterval:
    return _delta_method_interval(delta_hat, ipw_variance_poisson(samples), summary, level, IntervalMethod.POISSON)
