from .analyze_routes import register as register_analyze
from .simulate_routes import register as register_simulate
from .density_routes import register as register_density
from src.config.env import LOG_LEVELS
import argparse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensivalue",
        description="Bayesian E-value sensitivity analysis for missing outcomes",
    )
    parser.add_argument("--threads", type=int, help="worker threads (default SENSIVALUE_THREADS)")
    parser.add_argument("--sig-digits", type=int, help="significant digits in reports (default SENSIVALUE_SIG_DIGITS)")
    parser.add_argument("--log-level", type=str.upper, choices=LOG_LEVELS, help="logging level (default SENSIVALUE_LOG_LEVEL)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    register_analyze(subparsers)
    register_simulate(subparsers)
    register_density(subparsers)
    return parser
