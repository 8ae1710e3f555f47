from pydantic import BaseModel, ConfigDict
from typing import List, Optional, Union

from .evalue import EvalueInterval
from .missing_data import OutcomeSummary
from .posterior import GeneralizedT
from .sensitivity import FittedHyperparams, NiwHyperparams

SCHEMA_VERSION = "1.0"


class EventReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    event_name: str
    n: int
    ipw_mean: Optional[float] = None
    complete_case_mean: Optional[float] = None
    summary: Optional[OutcomeSummary] = None
    intervals: List[EvalueInterval] = []
    skipped: bool = False
    warning: Optional[str] = None


class AnalysisReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    schema_version: str = SCHEMA_VERSION
    level: float
    n_draws: int
    seed: int
    m: int
    hyperparams: Optional[Union[FittedHyperparams, NiwHyperparams]] = None
    subjective_posterior: Optional[GeneralizedT] = None
    objective_posterior: Optional[GeneralizedT] = None
    events: List[EventReport]
