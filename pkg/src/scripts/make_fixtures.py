from src.utils.seeding import make_rng
from pathlib import Path
from typing import Tuple
import argparse
import logging
import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

EVENTS = [
    "page_view",
    "view_content",
    "search",
    "add_to_cart",
    "add_to_wishlist",
    "initiate_checkout",
    "add_payment_info",
    "purchase",
    "lead",
    "complete_registration",
    "contact",
    "subscribe",
    "start_trial",
    "schedule",
]

# surrogate population, same shape as the simulation defaults
PROPENSITY_A = 4.0
PROPENSITY_B = 36.0
PROPENSITY_FLOOR = 0.05
OUTCOME_MEANLOG = 1.076
OUTCOME_SDLOG = 0.35
BENCHMARK_SPREAD = 0.05


def make_units(seed: int, n_per_event: int) -> pd.DataFrame:
    """Unit rows per event; unobserved outcomes are written as empty cells."""
    frames = []
    for index, name in enumerate(EVENTS):
        rng = make_rng(seed, index, 0)
        pi = np.clip(rng.beta(PROPENSITY_A, PROPENSITY_B, size=n_per_event), PROPENSITY_FLOOR, 1.0)
        r = (rng.random(n_per_event) < pi).astype(int)
        y = rng.lognormal(OUTCOME_MEANLOG, OUTCOME_SDLOG, size=n_per_event)
        frames.append(
            pd.DataFrame({
                "event_name": name,
                "y": np.where(r == 1, np.round(y, 6).astype(str), ""),
                "r": r,
                "propensity": np.round(pi, 6),
            })
        )
    return pd.concat(frames, ignore_index=True)


def make_benchmarks(seed: int) -> pd.DataFrame:
    """Two external sources per event straddling the true outcome mean, so the discrepancies center on zero."""
    true_mean = float(np.exp(OUTCOME_MEANLOG + OUTCOME_SDLOG ** 2 / 2.0))
    rows = []
    for index, name in enumerate(EVENTS):
        rng = make_rng(seed, index, 1)
        offset = rng.normal(0.0, BENCHMARK_SPREAD)
        spread = abs(rng.normal(0.0, BENCHMARK_SPREAD))
        rows.append({
            "event_name": name,
            "mu_source1": round(true_mean + offset + spread, 6),
            "mu_source2": round(true_mean + offset - spread, 6),
        })
    return pd.DataFrame(rows, columns=["event_name", "mu_source1", "mu_source2"])


def write_fixtures(directory: str, seed: int = 2024, n_per_event: int = 400) -> Tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    units_path = directory / "units.csv"
    benchmarks_path = directory / "benchmarks.csv"
    make_units(seed, n_per_event).to_csv(units_path, index=False, lineterminator="\n")
    make_benchmarks(seed).to_csv(benchmarks_path, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(EVENTS)} events ({n_per_event} units each) to {directory}")
    return units_path, benchmarks_path


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    parser = argparse.ArgumentParser(description="Write synthetic unit and benchmark CSVs")
    parser.add_argument("directory")
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--n-per-event", type=int, default=400)
    args = parser.parse_args()
    write_fixtures(args.directory, args.seed, args.n_per_event)
