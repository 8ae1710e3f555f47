from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import List, Optional, Sequence
import math
import numpy as np


class MissingDataSample(BaseModel):
    """One unit: outcome y, observed flag r (1 = observed) and propensity pi."""

    model_config = ConfigDict(frozen=True)

    y: float
    r: int
    pi: float

    @field_validator("r")
    @classmethod
    def _check_r(cls, value: int) -> int:
        if value not in (0, 1):
            raise ValueError(f"missingness indicator r must be 0 or 1, got {value}")
        return value

    @field_validator("pi")
    @classmethod
    def _check_pi(cls, value: float) -> float:
        if not (0.0 < value <= 1.0):
            raise ValueError(f"propensity pi must lie in (0, 1], got {value}")
        return value

    @model_validator(mode="after")
    def _check_observed_y(self):
        if self.r == 1 and not math.isfinite(self.y):
            raise ValueError("observed outcome y must be finite")
        return self


class MissingDataBatch(BaseModel):
    """Columnar form of a list of MissingDataSample, used by the estimators."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    y: np.ndarray
    r: np.ndarray
    pi: np.ndarray

    @model_validator(mode="before")
    @classmethod
    def _coerce(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            data["y"] = np.array(data.get("y", []), dtype=np.float64).ravel()
            data["r"] = np.array(data.get("r", []), dtype=np.int8).ravel()
            data["pi"] = np.array(data.get("pi", []), dtype=np.float64).ravel()
        return data

    @model_validator(mode="after")
    def _check_columns(self):
        n = self.y.shape[0]
        if self.r.shape[0] != n or self.pi.shape[0] != n:
            raise ValueError("columns y, r, pi must have equal length")
        if n and not np.isin(self.r, (0, 1)).all():
            raise ValueError("missingness indicator r must be 0 or 1")
        if n and not ((self.pi > 0.0) & (self.pi <= 1.0)).all():
            raise ValueError("propensity pi must lie in (0, 1]")
        if n and not np.isfinite(self.y[self.r == 1]).all():
            raise ValueError("observed outcome y must be finite")
        for column in (self.y, self.r, self.pi):
            column.setflags(write=False)
        return self

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    @property
    def n_observed(self) -> int:
        return int(self.r.sum())

    @classmethod
    def from_samples(cls, samples: Sequence[MissingDataSample]) -> "MissingDataBatch":
        return cls(
            y=[s.y for s in samples],
            r=[s.r for s in samples],
            pi=[s.pi for s in samples],
        )

    def to_samples(self) -> List[MissingDataSample]:
        return [
            MissingDataSample(y=float(y), r=int(r), pi=float(pi))
            for y, r, pi in zip(self.y, self.r, self.pi)
        ]

    def take(self, index: np.ndarray) -> "MissingDataBatch":
        return MissingDataBatch(y=self.y[index], r=self.r[index], pi=self.pi[index])


class OutcomeSummary(BaseModel):
    """Observed fraction and outcome standard deviation feeding the standardized effect."""

    model_config = ConfigDict(frozen=True)

    p_obs: float
    sd_y: float
    n: int = Field(..., ge=1)

    @field_validator("p_obs")
    @classmethod
    def _check_p_obs(cls, value: float) -> float:
        if not (0.0 < value < 1.0):
            raise ValueError(f"observed fraction p_obs must lie in (0, 1), got {value}")
        return value

    @field_validator("sd_y")
    @classmethod
    def _check_sd_y(cls, value: float) -> float:
        if not (math.isfinite(value) and value > 0.0):
            raise ValueError(f"degenerate outcome variance: sd_y must be > 0, got {value}")
        return value


class BenchmarkPair(BaseModel):
    """Two noisy external measurements of one group's population mean."""

    model_config = ConfigDict(frozen=True)

    group_id: str
    mu_source1: float
    mu_source2: float
    line: Optional[int] = None

    @model_validator(mode="after")
    def _check_finite(self):
        if not (math.isfinite(self.mu_source1) and math.isfinite(self.mu_source2)):
            raise ValueError(f"benchmark values for group {self.group_id!r} must be finite")
        return self
