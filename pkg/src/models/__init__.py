from .missing_data import BenchmarkPair, MissingDataBatch, MissingDataSample, OutcomeSummary
from .sensitivity import (
    ConjugateUpdate,
    FitConfig,
    FittedHyperparams,
    Matrix2,
    NiwHyperparams,
    SensitivityPairs,
    Vector2,
)
from .posterior import EvaluePosterior, GeneralizedT
from .evalue import Branch, DensityVariant, EvalueDensityParams, EvalueInterval, IntervalMethod
from .study import StudyCell, StudyConfig, StudyResult
from .report import SCHEMA_VERSION, AnalysisReport, EventReport

__all__ = [
    "MissingDataSample", "MissingDataBatch", "OutcomeSummary", "BenchmarkPair",
    "SensitivityPairs", "NiwHyperparams", "FittedHyperparams", "ConjugateUpdate",
    "FitConfig", "Matrix2", "Vector2",
    "GeneralizedT", "EvaluePosterior",
    "IntervalMethod", "DensityVariant", "Branch", "EvalueInterval", "EvalueDensityParams",
    "StudyConfig", "StudyCell", "StudyResult",
    "EventReport", "AnalysisReport", "SCHEMA_VERSION",
]
