from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import List, Tuple

from .evalue import IntervalMethod
from .sensitivity import FitConfig, Matrix2, Vector2, as_matrix, check_spd


class StudyConfig(BaseModel):
    """Simulation design. Defaults give the desk-scale coverage study."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_units: int = Field(2500, ge=10)
    k_multipliers: Tuple[int, ...] = (1, 3, 6, 9, 12, 15, 18)
    n_trials: int = Field(1000, ge=1)
    m_groups: int = Field(15, ge=3)
    delta_mean: Vector2 = (0.0, 0.0)
    delta_cov: Matrix2 = ((0.0025, 0.0004), (0.0004, 0.0025))
    level: float = Field(0.95, gt=0.0, lt=1.0)
    master_seed: int = Field(42, ge=0)
    n_draws: int = Field(20_000, ge=100)
    # outcome / propensity surrogate
    propensity_a: float = Field(4.0, gt=0.0)
    propensity_b: float = Field(36.0, gt=0.0)
    propensity_floor: float = Field(0.05, gt=0.0, le=1.0)
    outcome_meanlog: float = 1.076
    outcome_sdlog: float = Field(0.35, gt=0.0)
    fit: FitConfig = FitConfig()

    @field_validator("delta_cov", mode="before")
    @classmethod
    def _coerce_cov(cls, value):
        return as_matrix(value)

    @field_validator("delta_cov")
    @classmethod
    def _check_cov(cls, value):
        return check_spd(value, "delta_cov")

    @field_validator("k_multipliers")
    @classmethod
    def _check_k(cls, value):
        if not value or any(k < 1 for k in value):
            raise ValueError("k_multipliers must be a nonempty list of positive integers")
        if len(set(value)) != len(value):
            raise ValueError("k_multipliers must not repeat")
        return value


class StudyCell(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: IntervalMethod
    k: int
    coverage: float = Field(..., ge=0.0, le=1.0)
    mean_width: float = Field(..., ge=0.0)
    n_ok: int = Field(..., ge=0)
    n_failed: int = Field(..., ge=0)


class StudyResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_trials: int
    level: float
    cells: List[StudyCell]

    def cell(self, method: IntervalMethod, k: int) -> StudyCell:
        for cell in self.cells:
            if cell.method == method and cell.k == k:
                return cell
        raise KeyError(f"no study cell for method={method.value}, k={k}")

    def by_method(self, method: IntervalMethod) -> List[StudyCell]:
        return sorted((c for c in self.cells if c.method == method), key=lambda c: c.k)
