from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import stats
import math
import numpy as np

from .missing_data import OutcomeSummary


class GeneralizedT(BaseModel):
    """Location-scale Student t; all density work is delegated to scipy.stats.t."""

    model_config = ConfigDict(frozen=True)

    location: float
    scale: float
    df: float

    @field_validator("location")
    @classmethod
    def _check_location(cls, value):
        if not math.isfinite(value):
            raise ValueError("location must be finite")
        return value

    @field_validator("scale")
    @classmethod
    def _check_scale(cls, value):
        if not (math.isfinite(value) and value > 0.0):
            raise ValueError(f"scale must be > 0, got {value}")
        return value

    @field_validator("df")
    @classmethod
    def _check_df(cls, value):
        if not (value > 0.0):
            raise ValueError(f"df must be > 0, got {value}")
        return value

    def frozen(self):
        return stats.t(df=self.df, loc=self.location, scale=self.scale)

    def pdf(self, x):
        return stats.t.pdf(x, self.df, loc=self.location, scale=self.scale)

    def logpdf(self, x):
        return stats.t.logpdf(x, self.df, loc=self.location, scale=self.scale)

    def cdf(self, x):
        return stats.t.cdf(x, self.df, loc=self.location, scale=self.scale)

    def ppf(self, q):
        return stats.t.ppf(q, self.df, loc=self.location, scale=self.scale)

    def mean(self) -> float:
        return self.location if self.df > 1.0 else float("nan")

    def var(self) -> float:
        if self.df <= 2.0:
            return float("inf")
        return self.scale ** 2 * self.df / (self.df - 2.0)


class EvaluePosterior(BaseModel):
    """Simulated E-values together with the signed log risk ratios they came from."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    samples: np.ndarray
    log_rr: np.ndarray
    summary: OutcomeSummary
    n_draws: int = Field(..., ge=1)
    seed: int

    @model_validator(mode="after")
    def _check_samples(self):
        if self.samples.shape != (self.n_draws,) or self.log_rr.shape != (self.n_draws,):
            raise ValueError("samples and log_rr must both hold n_draws values")
        if not (self.samples >= 1.0).all():
            raise ValueError("every E-value sample must be >= 1")
        self.samples.setflags(write=False)
        self.log_rr.setflags(write=False)
        return self
