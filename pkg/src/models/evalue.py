from pydantic import BaseModel, ConfigDict, Field, model_validator
from typing import Optional
from enum import Enum
import math


class IntervalMethod(str, Enum):
    TAYLOR = "taylor"
    POISSON = "poisson"
    SUBJECTIVE = "subjective"
    OBJECTIVE = "objective"
    CLOSED_FORM = "closed-form"


class DensityVariant(str, Enum):
    # known observed fraction; normal effect
    KNOWN_FRACTION = "known-fraction"
    # random missing fraction times normal effect
    RANDOM_FRACTION = "random-fraction"
    # random fraction and inverse-gamma outcome scale
    RANDOM_SCALE = "random-scale"


class Branch(str, Enum):
    RR_GT_1 = "rr_gt_1"
    RR_LT_1 = "rr_lt_1"


class EvalueInterval(BaseModel):
    model_config = ConfigDict(frozen=True)

    lower: float
    upper: float
    method: IntervalMethod
    level: float = Field(..., gt=0.0, lt=1.0)
    warning: Optional[str] = None

    @model_validator(mode="after")
    def _check_bounds(self):
        if not (math.isfinite(self.lower) and self.lower >= 1.0):
            raise ValueError(f"interval lower bound must be >= 1, got {self.lower}")
        if not (self.upper >= self.lower):
            raise ValueError(f"interval upper bound must be >= lower, got [{self.lower}, {self.upper}]")
        return self

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


class EvalueDensityParams(BaseModel):
    """Closed-form E-value density parameters.

    The normal variants carry (mu_rr, sigma_rr) for log RR; the random-scale
    variant carries a gamma shape alpha and rate beta_v for log RR.
    """

    model_config = ConfigDict(frozen=True)

    variant: DensityVariant
    mu_rr: Optional[float] = None
    sigma_rr: Optional[float] = None
    alpha: Optional[float] = None
    beta_v: Optional[float] = None

    @model_validator(mode="after")
    def _check_variant_fields(self):
        if self.variant == DensityVariant.RANDOM_SCALE:
            if self.alpha is None or not (self.alpha > 0.0 and math.isfinite(self.alpha)):
                raise ValueError("gamma shape alpha must be > 0")
            if self.beta_v is None or not (self.beta_v > 0.0 and math.isfinite(self.beta_v)):
                raise ValueError("gamma rate beta_v must be > 0")
        else:
            if self.mu_rr is None or not math.isfinite(self.mu_rr):
                raise ValueError("mu_rr must be finite")
            if self.sigma_rr is None or not (self.sigma_rr > 0.0 and math.isfinite(self.sigma_rr)):
                raise ValueError("sigma_rr must be > 0")
        return self

    @property
    def is_gamma(self) -> bool:
        return self.variant == DensityVariant.RANDOM_SCALE
