from src.models.evalue import Branch, DensityVariant, EvalueDensityParams, EvalueInterval, IntervalMethod
from src.models.missing_data import OutcomeSummary
from src.models.posterior import GeneralizedT
from src.services.evalue_service import RR_CONVERSION, evalue_from_rr, interval_from_log_rr
from src.utils.errors import ApproximationWarning, NumericalError, ValidationError
from src.utils.seeding import make_rng
from scipy import integrate, optimize, stats
from typing import Dict, Tuple
import logging
import math
import warnings
import numpy as np

logger = logging.getLogger(__name__)

RHO_LIMIT = 0.2
TAIL_MASS = 1e-12
# largest |ln RR| integrated over; V stays finite and (v - 1)^2 does not overflow
MAX_LOG_RR = 300.0

# ln RR ~ Gamma(alpha, rate) under the random-scale variant. Two orientations of the
# rate are in circulation; resolve_gamma_rate_convention picks one by simulation.
GAMMA_RATE_CONVENTIONS = {
    "reciprocal": lambda mu_q, eta, beta: beta / (RR_CONVERSION * mu_q * eta),
    "direct": lambda mu_q, eta, beta: mu_q * eta / (RR_CONVERSION * beta),
}
GAMMA_RATE_CONVENTION = "reciprocal"


def _positive(name: str, value: float):
    if not (math.isfinite(value) and value > 0.0):
        raise ValidationError(f"{name} must be > 0, got {value}")


def _warn_rho(name: str, rho: float):
    if rho > RHO_LIMIT:
        message = f"{name} = {rho:.3g} exceeds {RHO_LIMIT}; the normal product approximation may be poor"
        logger.warning(message)
        warnings.warn(message, ApproximationWarning, stacklevel=3)


def params_known_fraction(eta: float, tau: float, p_obs: float, sd_y: float) -> EvalueDensityParams:
    """delta ~ N(eta, tau^2) with a known observed fraction: ln RR is normal."""
    _positive("tau", tau)
    _positive("sd_y", sd_y)
    if not (0.0 < p_obs < 1.0):
        raise ValidationError(f"p_obs must lie in (0, 1), got {p_obs}")
    factor = RR_CONVERSION * (1.0 - p_obs) / sd_y
    return EvalueDensityParams(variant=DensityVariant.KNOWN_FRACTION, mu_rr=factor * eta, sigma_rr=factor * tau)


def _product_moments(eta: float, tau: float, mu_q: float, sigma_q: float) -> Tuple[float, float]:
    """Normal approximation to q * delta for independent normal q and delta."""
    if mu_q == 0.0 or eta == 0.0:
        raise ValidationError("mu_q and eta must be nonzero (the ratio checks are undefined)")
    _positive("tau", tau)
    if not (math.isfinite(sigma_q) and sigma_q >= 0.0):
        raise ValidationError(f"sigma_q must be >= 0, got {sigma_q}")
    _warn_rho("sigma_q / mu_q", abs(sigma_q / mu_q))
    _warn_rho("tau / eta", abs(tau / eta))
    mean = mu_q * eta
    sd = math.sqrt(mu_q ** 2 * tau ** 2 + eta ** 2 * sigma_q ** 2 + sigma_q ** 2 * tau ** 2)
    return mean, sd


def params_random_fraction(eta: float, tau: float, mu_q: float, sigma_q: float, sd_y: float) -> EvalueDensityParams:
    """q = 1 - P(R=1) ~ N(mu_q, sigma_q^2) times delta ~ N(eta, tau^2)."""
    _positive("sd_y", sd_y)
    mean, sd = _product_moments(eta, tau, mu_q, sigma_q)
    return EvalueDensityParams(
        variant=DensityVariant.RANDOM_FRACTION,
        mu_rr=RR_CONVERSION * mean / sd_y,
        sigma_rr=RR_CONVERSION * sd / sd_y,
    )


def params_random_scale(
    eta: float, tau: float, mu_q: float, sigma_q: float, alpha: float, beta: float,
    convention: str = GAMMA_RATE_CONVENTION,
) -> EvalueDensityParams:
    """As params_random_fraction, with sd_y ~ InvGamma(alpha, beta): ln RR is gamma."""
    if not eta > 0.0:
        raise ValidationError("random-scale variant requires positive effect direction (eta > 0)")
    _positive("mu_q", mu_q)
    _positive("alpha", alpha)
    _positive("beta", beta)
    mean, sd = _product_moments(eta, tau, mu_q, sigma_q)
    _warn_rho("product sd / product mean", sd / mean)
    if convention not in GAMMA_RATE_CONVENTIONS:
        raise ValidationError(f"unknown gamma rate convention: {convention}")
    rate = GAMMA_RATE_CONVENTIONS[convention](mu_q, eta, beta)
    return EvalueDensityParams(variant=DensityVariant.RANDOM_SCALE, alpha=alpha, beta_v=rate)


def params_from_posterior(post: GeneralizedT, summary: OutcomeSummary) -> EvalueDensityParams:
    """Normal approximation of a posterior t, mapped to the known-fraction variant."""
    if not post.df > 2.0:
        raise ValidationError(f"posterior variance is infinite for df = {post.df}")
    return params_known_fraction(post.location, math.sqrt(post.var()), summary.p_obs, summary.sd_y)


def log_rr_of(v):
    """|ln RR| at E-value v: ln(v^2 / (2v - 1))."""
    v = np.asarray(v, dtype=np.float64)
    return np.log1p((v - 1.0) ** 2 / (2.0 * v - 1.0))


def jacobian(v):
    v = np.asarray(v, dtype=np.float64)
    return 2.0 * (v - 1.0) / (v * (2.0 * v - 1.0))


def _check_support(v):
    if not np.all(np.asarray(v) > 1.0):
        raise ValidationError("E-value density is supported on v > 1")


def _density(params: EvalueDensityParams, v, branch: Branch):
    ell = log_rr_of(v)
    if params.is_gamma:
        if branch == Branch.RR_LT_1:
            return np.zeros_like(ell)
        return stats.gamma.pdf(ell, params.alpha, scale=1.0 / params.beta_v) * jacobian(v)
    signed = ell if branch == Branch.RR_GT_1 else -ell
    return stats.norm.pdf(signed, loc=params.mu_rr, scale=params.sigma_rr) * jacobian(v)


def density(params: EvalueDensityParams, v, branch: Branch):
    """Density of V on one branch; each branch integrates to that branch's probability."""
    _check_support(v)
    if params.is_gamma and branch == Branch.RR_LT_1:
        message = "RR < 1 branch of the random-scale variant is experimental and carries no mass"
        logger.warning(message)
        warnings.warn(message, ApproximationWarning, stacklevel=2)
    value = _density(params, v, branch)
    return float(value) if np.ndim(v) == 0 else value


def total_density(params: EvalueDensityParams, v):
    _check_support(v)
    value = _density(params, v, Branch.RR_GT_1) + _density(params, v, Branch.RR_LT_1)
    return float(value) if np.ndim(v) == 0 else value


def branch_probabilities(params: EvalueDensityParams) -> Tuple[float, float]:
    if params.is_gamma:
        return 1.0, 0.0
    upper = float(stats.norm.cdf(params.mu_rr / params.sigma_rr))
    return upper, float(stats.norm.cdf(-params.mu_rr / params.sigma_rr))


def _abs_log_rr_cdf(params: EvalueDensityParams, ell):
    """P(|ln RR| <= ell)."""
    if params.is_gamma:
        return stats.gamma.cdf(ell, params.alpha, scale=1.0 / params.beta_v)
    return (
        stats.norm.cdf(ell, loc=params.mu_rr, scale=params.sigma_rr)
        - stats.norm.cdf(-ell, loc=params.mu_rr, scale=params.sigma_rr)
    )


def cdf(params: EvalueDensityParams, v):
    """P(V <= v), both branches combined."""
    _check_support(v)
    value = _abs_log_rr_cdf(params, log_rr_of(v))
    return float(value) if np.ndim(v) == 0 else value


def quantile(params: EvalueDensityParams, prob: float) -> float:
    if not (0.0 < prob < 1.0):
        raise ValidationError(f"prob must lie in (0, 1), got {prob}")
    hi = 1.0
    for _ in range(200):
        if _abs_log_rr_cdf(params, hi) >= prob:
            break
        hi *= 2.0
    else:
        raise NumericalError("quantile bracket could not be found", {"prob": prob, "hi": hi})
    try:
        ell = optimize.brentq(
            lambda x: _abs_log_rr_cdf(params, x) - prob, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500
        )
    except (ValueError, RuntimeError) as e:
        logger.error(f"Quantile root-finding failed: {str(e)}")
        raise NumericalError("quantile root-finding did not converge", {"prob": prob, "bracket": (0.0, hi)})
    return float(evalue_from_rr(math.exp(ell)))


def _log_rr_quantile(params: EvalueDensityParams, prob: float) -> float:
    if params.is_gamma:
        return float(stats.gamma.ppf(prob, params.alpha, scale=1.0 / params.beta_v))
    return float(stats.norm.ppf(prob, loc=params.mu_rr, scale=params.sigma_rr))


def _evalue_at(ell: float) -> float:
    """V at |ln RR| = ell, with ell clamped to MAX_LOG_RR."""
    return float(evalue_from_rr(math.exp(min(ell, MAX_LOG_RR))))


def _upper_limit(params: EvalueDensityParams) -> float:
    """v beyond which the remaining mass is below TAIL_MASS, capped at MAX_LOG_RR."""
    ell = max(
        _log_rr_quantile(params, 1.0 - TAIL_MASS),
        -_log_rr_quantile(params, TAIL_MASS) if not params.is_gamma else 0.0,
    )
    if not ell <= MAX_LOG_RR:
        message = f"|ln RR| tail reaches {ell:.3g}; mass beyond {MAX_LOG_RR:g} is not integrated"
        logger.warning(message)
        warnings.warn(message, ApproximationWarning, stacklevel=3)
    return _evalue_at(max(ell, 1e-8))


def total_mass(params: EvalueDensityParams) -> float:
    """Adaptive quadrature of both branch densities over (1, v_max), taken in log v."""
    v_max = _upper_limit(params)
    breakpoints = sorted(
        {
            _evalue_at(abs(_log_rr_quantile(params, p)))
            for p in (0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99)
        }
        - {1.0}
    )
    breakpoints = [math.log(b) for b in breakpoints if 1.0 < b < v_max]
    total = 0.0
    for branch in (Branch.RR_GT_1, Branch.RR_LT_1):
        if params.is_gamma and branch == Branch.RR_LT_1:
            continue
        value, _ = integrate.quad(
            lambda s: _density(params, math.exp(s), branch) * math.exp(s),
            0.0,
            math.log(v_max),
            points=breakpoints or None,
            limit=500,
            epsabs=1e-13,
            epsrel=1e-10,
        )
        total += value
    return float(total)


def closed_form_interval(params: EvalueDensityParams, level: float) -> EvalueInterval:
    """Equal-tailed interval of signed ln RR mapped to the E-value scale."""
    if not (0.0 < level < 1.0):
        raise ValidationError(f"level must lie in (0, 1), got {level}")
    tail = (1.0 - level) / 2.0
    return interval_from_log_rr(
        _log_rr_quantile(params, tail), _log_rr_quantile(params, 1.0 - tail), IntervalMethod.CLOSED_FORM, level
    )


def simulate_random_scale_log_rr(
    eta: float, tau: float, mu_q: float, sigma_q: float, alpha: float, beta: float, n_draws: int, seed: int
) -> np.ndarray:
    """0.91 * q * delta / sd_y with q, delta normal and sd_y ~ InvGamma(alpha, beta)."""
    rng = make_rng(seed, 0)
    q = rng.normal(mu_q, sigma_q, n_draws)
    delta = rng.normal(eta, tau, n_draws)
    sd_y = stats.invgamma.rvs(alpha, scale=beta, size=n_draws, random_state=rng)
    return RR_CONVERSION * q * delta / sd_y


def resolve_gamma_rate_convention(
    eta: float = 1.0, tau: float = 0.01, mu_q: float = 0.2, sigma_q: float = 0.002,
    alpha: float = 3.0, beta: float = 2.0, n_draws: int = 1_000_000, seed: int = 2024,
) -> Tuple[str, Dict[str, float]]:
    """Pick the rate orientation whose gamma CDF is closest (sup distance) to simulated ln RR."""
    draws = simulate_random_scale_log_rr(eta, tau, mu_q, sigma_q, alpha, beta, n_draws, seed)
    distances = {}
    for name in GAMMA_RATE_CONVENTIONS:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ApproximationWarning)
            params = params_random_scale(eta, tau, mu_q, sigma_q, alpha, beta, convention=name)
        result = stats.kstest(draws, stats.gamma(params.alpha, scale=1.0 / params.beta_v).cdf)
        distances[name] = float(result.statistic)
    best = min(distances, key=distances.get)
    logger.info(f"Gamma rate convention resolved to {best!r} (sup distances {distances})")
    return best, distances
