from dotenv import load_dotenv
import os
import logging

logger = logging.getLogger(__name__)

load_dotenv()

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _int_env(name: str, default: int, minimum: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.error(f"{name} is not an integer: {raw!r}")
        raise ValueError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        logger.error(f"{name} below minimum {minimum}: {value}")
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


class EnvConfig:
    def __init__(self):
        default_threads = max(1, min(os.cpu_count() or 1, 8))
        self.THREADS = _int_env("SENSIVALUE_THREADS", default_threads, 1)
        self.LOG_LEVEL = os.getenv("SENSIVALUE_LOG_LEVEL", "INFO").upper()
        self.SIG_DIGITS = _int_env("SENSIVALUE_SIG_DIGITS", 6, 1)
        self.DEFAULT_SEED = _int_env("SENSIVALUE_DEFAULT_SEED", 42, 0)
        self.DEFAULT_DRAWS = _int_env("SENSIVALUE_DEFAULT_DRAWS", 100_000, 100)

        # Validate critical variables
        if self.LOG_LEVEL not in LOG_LEVELS:
            logger.error(f"SENSIVALUE_LOG_LEVEL is invalid: {self.LOG_LEVEL}")
            raise ValueError(f"SENSIVALUE_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}")
        if self.SIG_DIGITS > 17:
            logger.error(f"SENSIVALUE_SIG_DIGITS too large: {self.SIG_DIGITS}")
            raise ValueError("SENSIVALUE_SIG_DIGITS must be <= 17")

        logger.debug("Environment variables loaded successfully")
        logger.debug(f"THREADS: {self.THREADS}, SIG_DIGITS: {self.SIG_DIGITS}")

env_config = EnvConfig()
