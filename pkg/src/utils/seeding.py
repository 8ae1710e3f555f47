from enum import IntEnum
from typing import Sequence
import numpy as np


class Stream(IntEnum):
    """Independent random streams inside one simulation trial."""
    PAIRS = 0
    UNITS = 1
    POSTERIOR = 2


def derive_seed(master_seed: int, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), *[int(k) for k in keys]])


def make_rng(master_seed: int, *keys: int) -> np.random.Generator:
    """Generator keyed by (master_seed, *keys); same keys give the same stream."""
    return np.random.default_rng(derive_seed(master_seed, *keys))


def chunk_sizes(n: int, chunk: int) -> Sequence[int]:
    full, rest = divmod(int(n), int(chunk))
    return [chunk] * full + ([rest] if rest else [])
