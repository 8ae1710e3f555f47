from src.models.evalue import IntervalMethod
from src.models.missing_data import MissingDataBatch
from src.models.sensitivity import SensitivityPairs
from src.models.study import StudyCell, StudyConfig, StudyResult
from src.services.estimator_service import (
    outcome_summary,
    poisson_sampling_interval,
    taylor_series_interval,
)
from src.services.evalue_service import credible_interval, evalue_posterior_from_delta
from src.services.posterior_service import objective_posterior, sample_delta, subjective_posterior
from src.services.prior_fit_service import fit_hyperparams
from src.utils.concurrency import ordered_map
from src.utils.errors import SensivalueError, StudyError
from src.utils.seeding import Stream, derive_seed, make_rng
from typing import Dict, List, Optional, Tuple
import logging
import itertools
import numpy as np

logger = logging.getLogger(__name__)

STUDY_METHODS = (
    IntervalMethod.TAYLOR,
    IntervalMethod.POISSON,
    IntervalMethod.SUBJECTIVE,
    IntervalMethod.OBJECTIVE,
)
MAX_FAILED_FRACTION = 0.01
REFERENCE_EVALUE = 1.0

# (contains reference, width) or None when the method failed
Outcome = Optional[Tuple[bool, float]]


def generate_pairs(config: StudyConfig, trial_index: int) -> SensitivityPairs:
    rng = make_rng(config.master_seed, trial_index, Stream.PAIRS)
    rows = rng.multivariate_normal(np.asarray(config.delta_mean), np.asarray(config.delta_cov), size=config.m_groups)
    return SensitivityPairs(rows=rows)


def generate_units(config: StudyConfig, trial_index: int, k: int = 1) -> MissingDataBatch:
    """Surrogate population: Beta propensities with a floor, log-normal outcomes."""
    rng = make_rng(config.master_seed, trial_index, Stream.UNITS, k)
    n = config.n_units * k
    pi = np.clip(rng.beta(config.propensity_a, config.propensity_b, size=n), config.propensity_floor, 1.0)
    r = (rng.random(n) < pi).astype(np.int8)
    y = rng.lognormal(config.outcome_meanlog, config.outcome_sdlog, size=n)
    return MissingDataBatch(y=y, r=r, pi=pi)


def generate_trial(config: StudyConfig, trial_index: int, k: int = 1) -> Tuple[MissingDataBatch, SensitivityPairs]:
    """Deterministic in (master_seed, trial_index, k); the pairs do not depend on k."""
    return generate_units(config, trial_index, k), generate_pairs(config, trial_index)


def _posterior_seed(config: StudyConfig, trial_index: int) -> int:
    return int(derive_seed(config.master_seed, trial_index, Stream.POSTERIOR).generate_state(1)[0])


def _record(interval) -> Tuple[bool, float]:
    return interval.contains(REFERENCE_EVALUE), interval.width


def run_trial(config: StudyConfig, trial_index: int) -> Dict[Tuple[IntervalMethod, int], Outcome]:
    """Intervals of every method at every k for one trial.

    Posterior draws are shared across k, so Bayesian containment of V = 1 cannot vary with k.
    """
    outcomes: Dict[Tuple[IntervalMethod, int], Outcome] = {}
    pairs = generate_pairs(config, trial_index)
    delta_hat = float(pairs.as_array().mean())
    seed = _posterior_seed(config, trial_index)

    draws: Dict[IntervalMethod, Optional[np.ndarray]] = {}
    try:
        hyper = fit_hyperparams(pairs, config.fit)
        draws[IntervalMethod.SUBJECTIVE] = sample_delta(subjective_posterior(pairs, hyper), config.n_draws, seed, stream=0)
    except SensivalueError as e:
        logger.debug(f"trial {trial_index}: subjective posterior failed: {e.message}")
        draws[IntervalMethod.SUBJECTIVE] = None
    try:
        draws[IntervalMethod.OBJECTIVE] = sample_delta(objective_posterior(pairs), config.n_draws, seed, stream=1)
    except SensivalueError as e:
        logger.debug(f"trial {trial_index}: objective posterior failed: {e.message}")
        draws[IntervalMethod.OBJECTIVE] = None

    for k in config.k_multipliers:
        samples = generate_units(config, trial_index, k)
        try:
            summary = outcome_summary(samples)
        except SensivalueError as e:
            logger.debug(f"trial {trial_index}, k={k}: outcome summary failed: {e.message}")
            for method in STUDY_METHODS:
                outcomes[(method, k)] = None
            continue
        for method, builder in (
            (IntervalMethod.TAYLOR, taylor_series_interval),
            (IntervalMethod.POISSON, poisson_sampling_interval),
        ):
            try:
                outcomes[(method, k)] = _record(builder(samples, summary, config.level, delta_hat))
            except SensivalueError as e:
                logger.debug(f"trial {trial_index}, k={k}: {method.value} failed: {e.message}")
                outcomes[(method, k)] = None
        for method in (IntervalMethod.SUBJECTIVE, IntervalMethod.OBJECTIVE):
            delta = draws[method]
            if delta is None:
                outcomes[(method, k)] = None
                continue
            ep = evalue_posterior_from_delta(delta, summary, seed)
            outcomes[(method, k)] = _record(credible_interval(ep, config.level, method))
    return outcomes


def aggregate(config: StudyConfig, trials: List[Dict[Tuple[IntervalMethod, int], Outcome]]) -> StudyResult:
    cells = []
    for method in STUDY_METHODS:
        for k in config.k_multipliers:
            results = [t[(method, k)] for t in trials]
            ok = [r for r in results if r is not None]
            n_failed = len(results) - len(ok)
            if n_failed / len(results) >= MAX_FAILED_FRACTION:
                logger.error(f"{method.value} at k={k}: {n_failed}/{len(results)} trials failed")
                raise StudyError(
                    f"{n_failed} of {len(results)} trials failed for method {method.value} at k={k} "
                    f"(limit {MAX_FAILED_FRACTION:.0%})"
                )
            covered = sum(1 for contains, _ in ok if contains)
            cells.append(
                StudyCell(
                    method=method,
                    k=k,
                    coverage=covered / len(ok) if ok else 0.0,
                    mean_width=float(np.mean([width for _, width in ok])) if ok else 0.0,
                    n_ok=len(ok),
                    n_failed=n_failed,
                )
            )
    return StudyResult(n_trials=config.n_trials, level=config.level, cells=cells)


def run_study(config: StudyConfig) -> StudyResult:
    """Coverage of V = 1 and mean width per (method, k) over config.n_trials trials."""
    logger.info(
        f"Running study: {config.n_trials} trials, m={config.m_groups}, k={list(config.k_multipliers)}, "
        f"seed={config.master_seed}"
    )
    step = max(1, config.n_trials // 10)
    finished = itertools.count(1)

    def trial(index: int):
        outcomes = run_trial(config, index)
        count = next(finished)
        if count % step == 0:
            logger.info(f"Study progress: {count}/{config.n_trials} trials")
        return outcomes

    trials = ordered_map(trial, range(config.n_trials))
    return aggregate(config, trials)
