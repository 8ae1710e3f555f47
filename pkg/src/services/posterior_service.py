from src.models.posterior import GeneralizedT
from src.models.sensitivity import NiwHyperparams, SensitivityPairs
from src.services.prior_fit_service import ONES, conjugate_update, inv2, scatter_stats
from src.utils.concurrency import ordered_map
from src.utils.errors import DataError, ValidationError
from src.utils.seeding import chunk_sizes, make_rng
import logging
import numpy as np

logger = logging.getLogger(__name__)

DRAW_CHUNK = 65_536


def _quadratic_stats(matrix_inv: np.ndarray, center: np.ndarray):
    u = float(ONES @ matrix_inv @ center)
    z = float(ONES @ matrix_inv @ ONES)
    w = float(center @ matrix_inv @ center)
    return u, z, w


def _student_t(u: float, z: float, w: float, weight: float, df: float) -> GeneralizedT:
    # kernel (1 + weight * (delta*1 - c)' M^-1 (delta*1 - c))^(-(df + 1)/2)
    if not df > 1.0:
        raise DataError(f"posterior degrees of freedom must exceed 1, got {df}")
    numerator = 1.0 + weight * w - weight * u * u / z
    scale2 = numerator / (weight * z * df)
    if not scale2 > 0.0:
        logger.error(f"Posterior scale^2 is not positive: {scale2}")
        raise DataError("posterior kernel not normalizable")
    return GeneralizedT(location=u / z, scale=float(np.sqrt(scale2)), df=df)


def subjective_posterior(pairs: SensitivityPairs, hyper_star: NiwHyperparams) -> GeneralizedT:
    """Marginal posterior of delta under the fitted NIW prior."""
    update = conjugate_update(hyper_star, pairs)
    m = pairs.m
    u, z, w = _quadratic_stats(inv2(np.asarray(update.psi_tilde)), np.asarray(update.mean_tilde))
    return _student_t(u, z, w, m + 1.0, m + hyper_star.nu - 1.0)


def objective_posterior(pairs: SensitivityPairs) -> GeneralizedT:
    """Marginal posterior of delta under a flat mean prior and |Sigma|^(-3/2)."""
    delta_bar, s_matrix = scatter_stats(pairs)
    m = pairs.m
    u, z, w = _quadratic_stats(inv2(s_matrix), delta_bar)
    return _student_t(u, z, w, float(m), m - 1.0)


def subjective_kernel(delta, pairs: SensitivityPairs, hyper_star: NiwHyperparams):
    """Unnormalized posterior density of delta, evaluated from the quadratic form directly."""
    update = conjugate_update(hyper_star, pairs)
    m = pairs.m
    return _kernel(delta, np.asarray(update.psi_tilde), np.asarray(update.mean_tilde), m + 1.0, (m + hyper_star.nu) / 2.0)


def objective_kernel(delta, pairs: SensitivityPairs):
    delta_bar, s_matrix = scatter_stats(pairs)
    m = pairs.m
    return _kernel(delta, s_matrix, delta_bar, float(m), m / 2.0)


def _kernel(delta, matrix: np.ndarray, center: np.ndarray, weight: float, power: float):
    delta = np.atleast_1d(np.asarray(delta, dtype=np.float64))
    diff = delta[:, None] * ONES[None, :] - center[None, :]
    quad = np.einsum("ij,jk,ik->i", diff, inv2(matrix), diff)
    return (1.0 + weight * quad) ** (-power)


def sample_delta(post: GeneralizedT, n_draws: int, seed: int, stream: int = 0) -> np.ndarray:
    """location + scale * standard t draws, generated in fixed-size chunks with derived seeds."""
    if n_draws < 1:
        raise ValidationError(f"n_draws must be >= 1, got {n_draws}")

    def draw(job):
        index, size = job
        rng = make_rng(seed, stream, index)
        return rng.standard_t(post.df, size=size)

    chunks = ordered_map(draw, list(enumerate(chunk_sizes(n_draws, DRAW_CHUNK))))
    return post.location + post.scale * np.concatenate(chunks)
