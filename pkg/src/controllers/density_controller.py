from src.models.evalue import DensityVariant, EvalueDensityParams
from src.services.density_service import (
    cdf,
    params_known_fraction,
    params_random_fraction,
    params_random_scale,
    total_density,
)
from src.utils.errors import SensivalueError, UsageError
from pydantic import ValidationError as PydanticValidationError
from typing import Dict, Optional
import logging
import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

# inputs each variant is built from, in the order the service functions take them
VARIANT_INPUTS = {
    DensityVariant.KNOWN_FRACTION: ("eta", "tau", "p_obs", "sd_y"),
    DensityVariant.RANDOM_FRACTION: ("eta", "tau", "mu_q", "sigma_q", "sd_y"),
    DensityVariant.RANDOM_SCALE: ("eta", "tau", "mu_q", "sigma_q", "alpha", "beta"),
}
BUILDERS = {
    DensityVariant.KNOWN_FRACTION: params_known_fraction,
    DensityVariant.RANDOM_FRACTION: params_random_fraction,
    DensityVariant.RANDOM_SCALE: params_random_scale,
}


class DensityController:
    def build_params(self, variant: str, values: Dict[str, Optional[float]]) -> EvalueDensityParams:
        """Direct parameters (mu_rr/sigma_rr or alpha/beta_v) win over model inputs."""
        try:
            variant = DensityVariant(variant)
        except ValueError:
            raise UsageError(f"unknown variant {variant!r}; choose from {', '.join(v.value for v in DensityVariant)}")
        try:
            if variant == DensityVariant.RANDOM_SCALE and values.get("beta_v") is not None:
                return EvalueDensityParams(variant=variant, alpha=values.get("alpha"), beta_v=values["beta_v"])
            if variant != DensityVariant.RANDOM_SCALE and values.get("mu_rr") is not None:
                return EvalueDensityParams(variant=variant, mu_rr=values["mu_rr"], sigma_rr=values.get("sigma_rr"))
            needed = VARIANT_INPUTS[variant]
            missing = [name for name in needed if values.get(name) is None]
            if missing:
                raise UsageError(f"variant {variant.value} needs: {', '.join('--' + m.replace('_', '-') for m in missing)}")
            return BUILDERS[variant](*[values[name] for name in needed])
        except PydanticValidationError as e:
            raise UsageError(f"invalid density parameters: {e}")
        except UsageError:
            raise
        except SensivalueError as e:
            raise UsageError(e.message)

    @staticmethod
    def grid(v_min: float, v_max: float, points: int, log_grid: bool = False) -> np.ndarray:
        if points < 1:
            raise UsageError("--points must be >= 1")
        if not v_min > 1.0:
            raise UsageError("--v-min must be > 1")
        if points == 1:
            return np.array([v_min])
        if not v_max > v_min:
            raise UsageError("--v-max must exceed --v-min")
        if log_grid:
            return np.geomspace(v_min, v_max, points)
        return np.linspace(v_min, v_max, points)

    def evaluate(self, params: EvalueDensityParams, grid: np.ndarray) -> pd.DataFrame:
        """(v, pdf, cdf) rows; pdf sums both branches."""
        logger.info(f"Evaluating {params.variant.value} density on {grid.size} point(s)")
        return pd.DataFrame({"v": grid, "pdf": total_density(params, grid), "cdf": cdf(params, grid)})
