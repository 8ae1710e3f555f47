from src.models.evalue import EvalueInterval, IntervalMethod
from src.models.missing_data import BenchmarkPair, MissingDataBatch
from src.models.posterior import GeneralizedT
from src.models.report import AnalysisReport, EventReport
from src.models.sensitivity import FitConfig, NiwHyperparams
from src.services.density_service import closed_form_interval, params_from_posterior
from src.services.estimator_service import (
    check_group_alignment,
    complete_case_mean,
    ipw_mean,
    outcome_summary,
    poisson_sampling_interval,
    sensitivity_pairs,
    taylor_series_interval,
)
from src.services.evalue_service import MIN_DRAWS, credible_interval, evalue_posterior_from_delta
from src.services.posterior_service import objective_posterior, sample_delta, subjective_posterior
from src.services.prior_fit_service import fit_hyperparams
from src.utils.concurrency import ordered_map
from src.utils.data_loader import load_benchmarks, load_units
from src.utils.errors import DataError, SensivalueError, ValidationError
from src.utils.method_registry import resolve_methods
from pydantic import BaseModel, ConfigDict, Field
from typing import Dict, List, Optional
import logging
import numpy as np

logger = logging.getLogger(__name__)


class AnalyzeOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    level: float = Field(0.95, gt=0.0, lt=1.0)
    n_draws: int = Field(100_000, ge=MIN_DRAWS)
    seed: int = Field(42, ge=0)
    method: str = "all"
    fit: FitConfig = FitConfig()
    hyperparams: Optional[NiwHyperparams] = None
    closed_form: bool = True


class AnalysisController:
    """Pooled prior fit across events, then per-event E-value intervals."""

    def __init__(self, options: AnalyzeOptions = AnalyzeOptions()):
        self.options = options
        self.methods = resolve_methods(options.method)

    def _event_means(self, units: Dict[str, MissingDataBatch], benchmarks: List[BenchmarkPair]):
        """IPW means of usable events; degenerate events are dropped with a warning."""
        check_group_alignment(units, benchmarks)
        means: Dict[str, float] = {}
        skipped: Dict[str, str] = {}
        for name, batch in units.items():
            try:
                means[name] = ipw_mean(batch)
                outcome_summary(batch)
            except DataError as e:
                skipped[name] = e.message
                means.pop(name, None)
                logger.warning(f"Skipping degenerate group {name!r}: {e.message}")
        return means, skipped

    def _posterior_draws(self, post: Optional[GeneralizedT], stream: int) -> Optional[np.ndarray]:
        if post is None:
            return None
        return sample_delta(post, self.options.n_draws, self.options.seed, stream=stream)

    def _event_report(
        self,
        name: str,
        batch: MissingDataBatch,
        benchmark: BenchmarkPair,
        mean: float,
        draws: Dict[IntervalMethod, Optional[np.ndarray]],
        subjective: Optional[GeneralizedT],
    ) -> EventReport:
        level = self.options.level
        summary = outcome_summary(batch)
        delta_hat = mean - 0.5 * (benchmark.mu_source1 + benchmark.mu_source2)
        intervals: List[EvalueInterval] = []
        for method in self.methods:
            if method == IntervalMethod.TAYLOR:
                intervals.append(taylor_series_interval(batch, summary, level, delta_hat))
            elif method == IntervalMethod.POISSON:
                intervals.append(poisson_sampling_interval(batch, summary, level, delta_hat))
            else:
                ep = evalue_posterior_from_delta(draws[method], summary, self.options.seed)
                intervals.append(credible_interval(ep, level, method))
        if self.options.closed_form and subjective is not None and subjective.df > 2.0:
            intervals.append(closed_form_interval(params_from_posterior(subjective, summary), level))
        return EventReport(
            event_name=name,
            n=batch.n,
            ipw_mean=mean,
            complete_case_mean=complete_case_mean(batch),
            summary=summary,
            intervals=intervals,
        )

    def analyze(self, units: Dict[str, MissingDataBatch], benchmarks: List[BenchmarkPair]) -> AnalysisReport:
        try:
            if not benchmarks:
                raise DataError("no benchmark groups")
            means, skipped = self._event_means(units, benchmarks)
            usable = [b for b in benchmarks if b.group_id in means]
            pairs = sensitivity_pairs(means, usable)
            logger.info(f"Pooled {pairs.m} sensitivity pairs from {len(benchmarks)} benchmark group(s)")

            needs_bayes = any(m in (IntervalMethod.SUBJECTIVE, IntervalMethod.OBJECTIVE) for m in self.methods)
            hyper = None
            subjective = objective = None
            if needs_bayes or self.options.closed_form:
                hyper = self.options.hyperparams or fit_hyperparams(pairs, self.options.fit)
                subjective = subjective_posterior(pairs, hyper)
                objective = objective_posterior(pairs)
            draws = {
                IntervalMethod.SUBJECTIVE: self._posterior_draws(
                    subjective if IntervalMethod.SUBJECTIVE in self.methods else None, 0),
                IntervalMethod.OBJECTIVE: self._posterior_draws(
                    objective if IntervalMethod.OBJECTIVE in self.methods else None, 1),
            }

            by_name = {b.group_id: b for b in benchmarks}

            def report_for(name: str) -> EventReport:
                batch = units[name]
                if name in skipped:
                    return EventReport(event_name=name, n=batch.n, skipped=True, warning=skipped[name])
                return self._event_report(name, batch, by_name[name], means[name], draws, subjective)

            events = ordered_map(report_for, list(units))
            return AnalysisReport(
                level=self.options.level,
                n_draws=self.options.n_draws,
                seed=self.options.seed,
                m=pairs.m,
                hyperparams=hyper,
                subjective_posterior=subjective,
                objective_posterior=objective,
                events=events,
            )
        except SensivalueError as e:
            logger.error(f"Analysis failed: {e.message}")
            raise
        except ValueError as e:
            logger.error(f"Analysis failed on invalid values: {str(e)}")
            raise ValidationError(str(e))

    def analyze_files(self, unit_csv: str, benchmark_csv: str) -> AnalysisReport:
        units = load_units(unit_csv)
        benchmarks = load_benchmarks(benchmark_csv)
        return self.analyze(units, benchmarks)
