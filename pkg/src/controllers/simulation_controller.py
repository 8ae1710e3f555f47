from src.models.study import StudyConfig, StudyResult
from src.services.simulation_service import run_study
from src.utils.data_loader import load_study_config
from src.utils.errors import SensivalueError, UsageError
from pydantic import ValidationError as PydanticValidationError
from typing import Dict, Optional
import logging
import time

logger = logging.getLogger(__name__)


class SimulationController:
    def load_config(self, config_path: Optional[str], overrides: Optional[Dict] = None) -> StudyConfig:
        """Study design from a config file (JSON or KEY=value), with CLI overrides applied last."""
        if config_path:
            return load_study_config(config_path, overrides)
        try:
            return StudyConfig(**(overrides or {}))
        except PydanticValidationError as e:
            raise UsageError(f"invalid study options: {e}")

    def simulate(self, config: StudyConfig) -> StudyResult:
        logger.info(
            f"Running {config.n_trials} trial(s), n_units={config.n_units}, m={config.m_groups}, "
            f"k={list(config.k_multipliers)}"
        )
        started = time.perf_counter()
        try:
            result = run_study(config)
        except SensivalueError as e:
            logger.error(f"Simulation failed: {e.message}")
            raise
        logger.info(f"Study finished in {time.perf_counter() - started:.1f}s")
        return result
