from src.models.evalue import EvalueInterval, IntervalMethod
from src.models.missing_data import OutcomeSummary
from src.models.posterior import EvaluePosterior, GeneralizedT
from src.services.posterior_service import sample_delta
from src.utils.errors import ApproximationWarning, ValidationError
from typing import Dict, Optional, Union
import logging
import warnings
import numpy as np

logger = logging.getLogger(__name__)

# standardized mean difference -> log risk ratio
RR_CONVERSION = 0.91
MIN_DRAWS = 100
MIN_INTERVAL_DRAWS = 1000

ArrayLike = Union[float, np.ndarray]


def _scalar_or_array(value: np.ndarray, like) -> ArrayLike:
    return float(value) if np.ndim(like) == 0 else value


def standardized_effect(delta: ArrayLike, summary: OutcomeSummary) -> ArrayLike:
    """(1 - P(R=1)) * delta / sd_y."""
    value = (1.0 - summary.p_obs) * np.asarray(delta, dtype=np.float64) / summary.sd_y
    return _scalar_or_array(value, delta)


def rr_from_effect(mu_missing: ArrayLike) -> ArrayLike:
    value = np.exp(RR_CONVERSION * np.asarray(mu_missing, dtype=np.float64))
    return _scalar_or_array(value, mu_missing)


def evalue_from_rr(rr: ArrayLike) -> ArrayLike:
    """E-value of a risk ratio; RR < 1 is handled through 1/RR so V(rr) == V(1/rr)."""
    array = np.asarray(rr, dtype=np.float64)
    if not (np.isfinite(array).all() and (array > 0.0).all()):
        raise ValidationError("risk ratio must be finite and > 0")
    with np.errstate(divide="ignore"):
        r = np.where(array >= 1.0, array, 1.0 / array)
    value = r + np.sqrt(r * (r - 1.0))
    return _scalar_or_array(value, rr)


def rr_from_evalue(v: ArrayLike) -> ArrayLike:
    """Inverse of the RR > 1 branch: RR = v^2 / (2v - 1)."""
    array = np.asarray(v, dtype=np.float64)
    if not (array >= 1.0).all():
        raise ValidationError("E-value must be >= 1")
    return _scalar_or_array(array * array / (2.0 * array - 1.0), v)


def evalue_slope(rr: float) -> float:
    """|dV/d log RR|, using the mirrored branch for RR < 1."""
    r = rr if rr >= 1.0 else 1.0 / rr
    if r == 1.0:
        return float("inf")
    dv_drr = 1.0 + (2.0 * r - 1.0) / (2.0 * np.sqrt(r * r - r))
    return float(dv_drr * r)


def interval_from_log_rr(
    low: float, high: float, method: IntervalMethod, level: float, warning: Optional[str] = None
) -> EvalueInterval:
    """Map an interval for signed log RR onto the E-value scale.

    An interval straddling 0 contains RR = 1 and so reaches V = 1.
    """
    v_low = evalue_from_rr(float(np.exp(low)))
    v_high = evalue_from_rr(float(np.exp(high)))
    if low <= 0.0 <= high:
        lower, upper = 1.0, max(v_low, v_high)
    else:
        lower, upper = min(v_low, v_high), max(v_low, v_high)
    return EvalueInterval(lower=lower, upper=upper, method=method, level=level, warning=warning)


def evalue_posterior_from_delta(
    delta: np.ndarray, summary: OutcomeSummary, seed: int
) -> EvaluePosterior:
    mu_missing = standardized_effect(np.asarray(delta, dtype=np.float64), summary)
    log_rr = RR_CONVERSION * mu_missing
    samples = evalue_from_rr(rr_from_effect(mu_missing))
    return EvaluePosterior(
        samples=np.atleast_1d(samples),
        log_rr=np.atleast_1d(log_rr),
        summary=summary,
        n_draws=int(np.size(delta)),
        seed=seed,
    )


def posterior_evalue(
    post: GeneralizedT, summary: OutcomeSummary, n_draws: int, seed: int, stream: int = 0
) -> EvaluePosterior:
    """Draw delta from the posterior and push every draw through the E-value map."""
    if n_draws < MIN_DRAWS:
        logger.error(f"posterior_evalue called with {n_draws} draws")
        raise ValidationError(f"at least {MIN_DRAWS} posterior draws are required, got {n_draws}")
    if n_draws < MIN_INTERVAL_DRAWS:
        message = f"{n_draws} posterior draws is below {MIN_INTERVAL_DRAWS}; interval endpoints will be noisy"
        logger.warning(message)
        warnings.warn(message, ApproximationWarning, stacklevel=2)
    delta = sample_delta(post, n_draws, seed, stream=stream)
    return evalue_posterior_from_delta(delta, summary, seed)


def credible_interval(
    ep: EvaluePosterior, level: float, method: IntervalMethod = IntervalMethod.SUBJECTIVE
) -> EvalueInterval:
    """Equal-tailed interval from the signed log-RR draws (linear interpolation)."""
    if not (0.0 < level < 1.0):
        raise ValidationError(f"level must lie in (0, 1), got {level}")
    tail = (1.0 - level) / 2.0
    low, high = np.quantile(ep.log_rr, [tail, 1.0 - tail])
    return interval_from_log_rr(float(low), float(high), method, level)


def summary_stats(ep: EvaluePosterior, threshold: float = 1.25) -> Dict[str, float]:
    return {
        "mean": float(np.mean(ep.samples)),
        "median": float(np.median(ep.samples)),
        "prob_exceeds": float(np.mean(ep.samples > threshold)),
        "threshold": float(threshold),
    }
