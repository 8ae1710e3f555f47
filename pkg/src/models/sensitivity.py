from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Tuple
import math
import numpy as np

Vector2 = Tuple[float, float]
Matrix2 = Tuple[Vector2, Vector2]

SYMMETRY_RTOL = 1e-9


def as_matrix(matrix) -> Matrix2:
    array = np.asarray(matrix, dtype=np.float64)
    if array.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {array.shape}")
    return ((float(array[0, 0]), float(array[0, 1])), (float(array[1, 0]), float(array[1, 1])))


def check_spd(matrix: Matrix2, name: str) -> Matrix2:
    """Symmetrize within tolerance and require both eigenvalues > 0."""
    array = np.asarray(matrix, dtype=np.float64)
    if not np.isfinite(array).all():
        raise ValueError(f"{name} must be finite")
    scale = max(abs(array[0, 1]), abs(array[1, 0]), abs(array[0, 0]), abs(array[1, 1]), 1e-300)
    if abs(array[0, 1] - array[1, 0]) > SYMMETRY_RTOL * scale:
        raise ValueError(f"{name} must be symmetric positive definite (not symmetric)")
    off = 0.5 * (array[0, 1] + array[1, 0])
    det = array[0, 0] * array[1, 1] - off * off
    if not (array[0, 0] > 0.0 and det > 0.0):
        raise ValueError(f"{name} must be symmetric positive definite (eigenvalues not all > 0)")
    return ((float(array[0, 0]), float(off)), (float(off), float(array[1, 1])))


class SensitivityPairs(BaseModel):
    """m rows of two-source sensitivity-parameter estimates."""

    model_config = ConfigDict(frozen=True)

    rows: Tuple[Vector2, ...]

    @field_validator("rows", mode="before")
    @classmethod
    def _coerce_rows(cls, value):
        array = np.asarray(value, dtype=np.float64)
        if array.ndim != 2 or array.shape[1] != 2:
            raise ValueError("rows must be a sequence of two-dimensional vectors")
        return tuple((float(a), float(b)) for a, b in array)

    @field_validator("rows")
    @classmethod
    def _check_rows(cls, value):
        if len(value) < 3:
            raise ValueError(f"at least 3 sensitivity pairs are required (m >= 3), got {len(value)}")
        if not all(math.isfinite(a) and math.isfinite(b) for a, b in value):
            raise ValueError("every sensitivity pair must be finite")
        return value

    @property
    def m(self) -> int:
        return len(self.rows)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.rows, dtype=np.float64).reshape(-1, 2)


class NiwHyperparams(BaseModel):
    """Prior location delta0, scale matrix psi and degrees of freedom nu."""

    model_config = ConfigDict(frozen=True)

    delta0: float
    psi: Matrix2
    nu: float

    @field_validator("psi", mode="before")
    @classmethod
    def _coerce_psi(cls, value):
        return as_matrix(value)

    @field_validator("psi")
    @classmethod
    def _check_psi(cls, value):
        return check_spd(value, "psi")

    @field_validator("delta0")
    @classmethod
    def _check_delta0(cls, value):
        if not math.isfinite(value):
            raise ValueError("delta0 must be finite")
        return value

    @field_validator("nu")
    @classmethod
    def _check_nu(cls, value):
        if not (math.isfinite(value) and value > 1.0):
            raise ValueError(f"nu must exceed p - 1 = 1, got {value}")
        return value

    def psi_array(self) -> np.ndarray:
        return np.asarray(self.psi, dtype=np.float64)


class FittedHyperparams(NiwHyperparams):
    objective: float
    psi_convex_at_nu: bool
    iterations: int = Field(..., ge=0)
    converged: bool = True


class ConjugateUpdate(BaseModel):
    """Posterior NIW parameters plus the scatter statistics they came from."""

    model_config = ConfigDict(frozen=True)

    delta_tilde: float
    psi_tilde: Matrix2
    nu_tilde: float
    s_matrix: Matrix2
    delta_bar: Vector2
    mean_tilde: Vector2
    nu: float
    m: int

    @field_validator("psi_tilde", "s_matrix", mode="before")
    @classmethod
    def _coerce_matrix(cls, value):
        return as_matrix(value)

    @field_validator("psi_tilde")
    @classmethod
    def _check_psi_tilde(cls, value):
        return check_spd(value, "psi_tilde")

    @model_validator(mode="after")
    def _check_nu_tilde(self):
        if self.nu_tilde != self.nu + self.m:
            raise ValueError("nu_tilde must equal nu + m exactly")
        return self


class FitConfig(BaseModel):
    """Knobs for the empirical-Bayes fit."""

    model_config = ConfigDict(frozen=True)

    nu_min: float = Field(1.05, gt=1.0)
    nu_max_factor: float = Field(50.0, gt=0.0)
    grid_size: int = Field(400, ge=16)
    refine_knee: bool = True
    tol: float = Field(1e-9, gt=0.0)
    xatol: float = Field(1e-10, gt=0.0)
    max_iter: int = Field(50, ge=1)

    def nu_bounds(self, m: int) -> Tuple[float, float]:
        upper = self.nu_max_factor * m
        if upper <= self.nu_min:
            raise ValueError(f"nu grid is empty: [{self.nu_min}, {upper}]")
        return self.nu_min, upper
