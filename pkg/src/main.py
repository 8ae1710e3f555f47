from src.config.env import env_config
from src.config.worker_pool import WorkerPool
from src.routes import build_parser
from src.utils.errors import SensivalueError
from typing import List, Optional
import logging
import sys


# Diagnostics go to stderr; stdout carries reports only
logging.basicConfig(
    level=env_config.LOG_LEVEL,
    stream=sys.stderr,
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)
logger = logging.getLogger(__name__)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2

    if args.log_level:
        logging.getLogger().setLevel(args.log_level)
    if args.threads is not None and args.threads < 1:
        logger.error("--threads must be >= 1")
        return 2
    if args.sig_digits is not None and not (1 <= args.sig_digits <= 17):
        logger.error("--sig-digits must lie in [1, 17]")
        return 2

    WorkerPool.start(args.threads)
    try:
        return args.handler(args)
    except SensivalueError as e:
        logger.error(f"{args.command} failed: {e.message}")
        return e.exit_code
    finally:
        WorkerPool.close()


if __name__ == "__main__":
    sys.exit(main())
