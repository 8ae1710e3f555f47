from concurrent.futures import ThreadPoolExecutor
from typing import Optional
from .env import env_config
import logging

logger = logging.getLogger(__name__)

class WorkerPool:
    executor: Optional[ThreadPoolExecutor] = None
    threads: int = 1

    @classmethod
    def start(cls, threads: Optional[int] = None):
        requested = threads or env_config.THREADS
        if cls.executor is not None:
            if requested == cls.threads:
                logger.debug("Worker pool already running")
                return
            cls.close()
        cls.threads = max(1, int(requested))
        if cls.threads > 1:
            cls.executor = ThreadPoolExecutor(max_workers=cls.threads, thread_name_prefix="sensivalue")
        logger.debug(f"Worker pool started with {cls.threads} thread(s)")

    @classmethod
    def close(cls):
        if cls.executor:
            cls.executor.shutdown(wait=True)
            cls.executor = None
            logger.debug("Worker pool closed")
        cls.threads = 1

    @classmethod
    def get_executor(cls) -> Optional[ThreadPoolExecutor]:
        """Return the shared executor, or None when running serially."""
        if cls.executor is None and cls.threads > 1:
            logger.warning("Worker pool not started, starting it now")
            cls.start(cls.threads)
        return cls.executor
