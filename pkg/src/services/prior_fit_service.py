from src.models.sensitivity import (
    ConjugateUpdate,
    FitConfig,
    FittedHyperparams,
    NiwHyperparams,
    SensitivityPairs,
)
from src.utils.errors import DataError, FitError, NumericalError, ValidationError
from scipy import optimize, special
from functools import lru_cache
from typing import Tuple
import logging
import math
import numpy as np

logger = logging.getLogger(__name__)

DET_FLOOR = 1e-300
SCATTER_RTOL = 1e-12
ONES = np.ones(2)


def det2(a: np.ndarray) -> float:
    return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])


def inv2(a: np.ndarray) -> np.ndarray:
    det = det2(a)
    if not det > DET_FLOOR:
        raise NumericalError("2x2 matrix is singular or not positive definite", {"det": det})
    return np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det


def logdet2(a: np.ndarray) -> float:
    det = det2(a)
    if not det > DET_FLOOR:
        raise NumericalError("2x2 matrix is singular or not positive definite", {"det": det})
    return math.log(det)


def _raw_scatter(rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    delta_bar = rows.mean(axis=0)
    centered = rows - delta_bar
    return delta_bar, centered.T @ centered


def scatter_stats(pairs: SensitivityPairs) -> Tuple[np.ndarray, np.ndarray]:
    """Row mean and centered scatter S (not divided by m)."""
    delta_bar, s_matrix = _raw_scatter(pairs.as_array())
    det = det2(s_matrix)
    if not (det > DET_FLOOR and det > SCATTER_RTOL * s_matrix[0, 0] * s_matrix[1, 1]):
        logger.error(f"Scatter matrix is singular (det={det:.3e}, m={pairs.m})")
        raise DataError("degenerate scatter: sensitivity pairs have a singular scatter matrix")
    return delta_bar, s_matrix


def _rank_one(delta_bar: np.ndarray, delta0: float, m: int) -> np.ndarray:
    d = delta_bar - delta0 * ONES
    return (m / (m + 1.0)) * np.outer(d, d)


def conjugate_update(hyper: NiwHyperparams, pairs: SensitivityPairs) -> ConjugateUpdate:
    rows = pairs.as_array()
    m = rows.shape[0]
    delta_bar, s_matrix = _raw_scatter(rows)
    psi_tilde = hyper.psi_array() + s_matrix + _rank_one(delta_bar, hyper.delta0, m)
    delta_tilde = (hyper.delta0 + (m / 2.0) * float(delta_bar.sum())) / (m + 1.0)
    mean_tilde = (m * delta_bar + hyper.delta0 * ONES) / (m + 1.0)
    try:
        return ConjugateUpdate(
            delta_tilde=delta_tilde,
            psi_tilde=psi_tilde,
            nu_tilde=hyper.nu + m,
            s_matrix=s_matrix,
            delta_bar=(float(delta_bar[0]), float(delta_bar[1])),
            mean_tilde=(float(mean_tilde[0]), float(mean_tilde[1])),
            nu=hyper.nu,
            m=m,
        )
    except ValueError as e:
        logger.error(f"Conjugate update failed: {str(e)}")
        raise DataError(f"conjugate update is not positive definite: {str(e)}")


def gamma2_log(a):
    """log of the bivariate gamma function, sqrt(pi) * Gamma(a) * Gamma(a - 1/2)."""
    if np.any(np.asarray(a) <= 0.5):
        raise ValidationError(f"bivariate gamma needs a > 1/2, got {a}")
    value = special.multigammaln(a, 2)
    return float(value) if np.ndim(a) == 0 else value


def _objective(delta0: float, psi: np.ndarray, nu: float, delta_bar: np.ndarray, s_matrix: np.ndarray, m: int) -> float:
    psi_tilde = psi + s_matrix + _rank_one(delta_bar, delta0, m)
    nu_tilde = nu + m
    return (
        m * math.log(math.pi)
        - 0.5 * nu * logdet2(psi)
        + 0.5 * nu_tilde * logdet2(psi_tilde)
        + gamma2_log(nu / 2.0)
        - gamma2_log(nu_tilde / 2.0)
    )


def neg_log_marginal(hyper: NiwHyperparams, pairs: SensitivityPairs) -> float:
    """Negative log marginal likelihood of the pairs under the NIW prior, without the log(m+1) term."""
    rows = pairs.as_array()
    delta_bar, s_matrix = _raw_scatter(rows)
    try:
        return _objective(hyper.delta0, hyper.psi_array(), hyper.nu, delta_bar, s_matrix, rows.shape[0])
    except NumericalError as e:
        logger.error(f"Objective evaluation failed: {e.message}")
        raise


def log_evidence(hyper: NiwHyperparams, pairs: SensitivityPairs) -> float:
    """Exact log marginal density of the pairs (mean prior N(delta0 * 1, Sigma))."""
    return -neg_log_marginal(hyper, pairs) - math.log(pairs.m + 1.0)


def psi_star(delta0: float, nu: float, pairs: SensitivityPairs) -> np.ndarray:
    """Minimizer of the objective in psi at fixed (delta0, nu)."""
    if not nu > 1.0:
        raise ValidationError(f"nu must exceed 1, got {nu}")
    delta_bar, s_matrix = scatter_stats(pairs)
    m = pairs.m
    return (nu / m) * (s_matrix + _rank_one(delta_bar, delta0, m))


def profiled_nu_objective(nu, m: int):
    """Objective at psi = psi_star as a function of nu, up to a term free of nu."""
    nu = np.asarray(nu, dtype=np.float64)
    value = (
        nu * np.log1p(m / nu)
        + m * np.log1p(nu / m)
        + special.multigammaln(nu / 2.0, 2)
        - special.multigammaln((nu + m) / 2.0, 2)
    )
    return float(value) if value.ndim == 0 else value


def profiled_nu_derivatives(nu, m: int):
    nu = np.asarray(nu, dtype=np.float64)
    digamma, trigamma = special.digamma, lambda x: special.polygamma(1, x)
    first = np.log1p(m / nu) + 0.5 * (
        digamma(nu / 2.0) + digamma((nu - 1.0) / 2.0)
        - digamma((nu + m) / 2.0) - digamma((nu + m - 1.0) / 2.0)
    )
    second = 1.0 / (nu + m) - 1.0 / nu + 0.25 * (
        trigamma(nu / 2.0) + trigamma((nu - 1.0) / 2.0)
        - trigamma((nu + m) / 2.0) - trigamma((nu + m - 1.0) / 2.0)
    )
    return first, second


def profiled_objective(delta0: float, nu: float, pairs: SensitivityPairs) -> float:
    """Objective with psi replaced by psi_star(delta0, nu)."""
    delta_bar, s_matrix = scatter_stats(pairs)
    m = pairs.m
    a_matrix = s_matrix + _rank_one(delta_bar, delta0, m)
    return m * math.log(math.pi) + 0.5 * m * logdet2(a_matrix) + profiled_nu_objective(nu, m)


def _log_curvature(x, m: int):
    nu = np.exp(x)
    first, second = profiled_nu_derivatives(nu, m)
    l_x = nu * first
    l_xx = nu * first + nu * nu * second
    return l_xx / (1.0 + l_x * l_x) ** 1.5


@lru_cache(maxsize=64)
def select_nu_knee(m: int, config: FitConfig = FitConfig()) -> float:
    """Knee of the profiled objective in log(nu): the point of maximum curvature."""
    nu_min, nu_max = config.nu_bounds(m)
    x = np.linspace(math.log(nu_min), math.log(nu_max), config.grid_size)
    values = profiled_nu_objective(np.exp(x), m)
    slope = np.gradient(values, x)
    curvature = np.gradient(slope, x) / (1.0 + slope * slope) ** 1.5
    i = int(np.argmax(curvature))
    if not config.refine_knee:
        return float(math.exp(x[i]))
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, x.size - 1)]
    result = optimize.minimize_scalar(
        lambda t: -_log_curvature(t, m),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": config.xatol},
    )
    if not result.success:
        logger.warning(f"Knee refinement did not converge for m={m}, using grid point")
        return float(math.exp(x[i]))
    return float(math.exp(result.x))


def delta0_feasible_interval(pairs: SensitivityPairs) -> Tuple[float, float]:
    """Intersection of the convexity ball with the line delta0 * 1."""
    delta_bar, s_matrix = scatter_stats(pairs)
    m = pairs.m
    s_inv = inv2(s_matrix)
    u = float(ONES @ s_inv @ delta_bar)
    z = float(ONES @ s_inv @ ONES)
    w = float(delta_bar @ s_inv @ delta_bar)
    radius2 = (m + 1.0) / m - (w - u * u / z)
    if radius2 < 0.0:
        logger.error(f"Convexity region misses the delta0 line (slack {radius2:.3e})")
        raise FitError("delta0 feasible interval is empty")
    half = math.sqrt(radius2 / z)
    return u / z - half, u / z + half


def in_convexity_ball(delta0: float, pairs: SensitivityPairs, slack: float = 1e-12) -> bool:
    delta_bar, s_matrix = scatter_stats(pairs)
    d = delta_bar - delta0 * ONES
    return float(d @ inv2(s_matrix) @ d) <= (pairs.m + 1.0) / pairs.m * (1.0 + slack)


def psi_convexity_check(hyper: NiwHyperparams, pairs: SensitivityPairs, rel_step: float = 1e-3) -> bool:
    """Second differences of the objective along the three free psi directions are >= 0."""
    psi = hyper.psi_array()
    delta_bar, s_matrix = scatter_stats(pairs)
    m = pairs.m
    h = rel_step * float(np.sqrt(abs(det2(psi))))
    directions = (
        np.array([[1.0, 0.0], [0.0, 0.0]]),
        np.array([[0.0, 0.0], [0.0, 1.0]]),
        np.array([[0.0, 1.0], [1.0, 0.0]]),
    )
    center = _objective(hyper.delta0, psi, hyper.nu, delta_bar, s_matrix, m)
    for direction in directions:
        step = h * direction
        plus = _objective(hyper.delta0, psi + step, hyper.nu, delta_bar, s_matrix, m)
        minus = _objective(hyper.delta0, psi - step, hyper.nu, delta_bar, s_matrix, m)
        if plus - 2.0 * center + minus < -1e-12 * max(1.0, abs(center)):
            return False
    return True


class PriorFitService:
    """Empirical-Bayes fit of (delta0, psi, nu) by alternating closed form and 1-D searches."""

    def __init__(self, config: FitConfig = FitConfig()):
        self.config = config

    def _fit_delta0(self, pairs: SensitivityPairs, nu: float) -> float:
        lo, hi = delta0_feasible_interval(pairs)
        if hi - lo <= 0.0:
            return lo
        result = optimize.minimize_scalar(
            lambda d0: profiled_objective(d0, nu, pairs),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": self.config.xatol * max(1.0, abs(lo), abs(hi)), "maxiter": 500},
        )
        if not result.success:
            raise FitError(f"delta0 search did not converge: {result.message}")
        return float(result.x)

    def fit(self, pairs: SensitivityPairs) -> FittedHyperparams:
        delta_bar, _ = scatter_stats(pairs)
        m = pairs.m
        delta0 = float(delta_bar.mean())
        previous = math.inf
        last = None
        for iteration in range(1, self.config.max_iter + 1):
            nu = select_nu_knee(m, self.config)
            delta0 = self._fit_delta0(pairs, nu)
            psi = psi_star(delta0, nu, pairs)
            last = NiwHyperparams(delta0=delta0, psi=psi, nu=nu)
            objective = neg_log_marginal(last, pairs)
            logger.debug(f"fit iteration {iteration}: objective={objective:.12g}, nu={nu:.6g}, delta0={delta0:.6g}")
            if previous - objective < self.config.tol:
                return FittedHyperparams(
                    delta0=delta0,
                    psi=psi,
                    nu=nu,
                    objective=objective,
                    psi_convex_at_nu=psi_convexity_check(last, pairs),
                    iterations=iteration,
                )
            previous = objective
        logger.error(f"Prior fit did not converge after {self.config.max_iter} iterations")
        raise FitError(
            f"prior fit did not converge after {self.config.max_iter} iterations",
            last_iterate=last,
            iterations=self.config.max_iter,
        )


def fit_hyperparams(pairs: SensitivityPairs, config: FitConfig = FitConfig()) -> FittedHyperparams:
    return PriorFitService(config).fit(pairs)
