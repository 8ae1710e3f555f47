from src.config.worker_pool import WorkerPool
from src.main import main
from src.models.missing_data import MissingDataBatch, OutcomeSummary
from src.models.sensitivity import NiwHyperparams, SensitivityPairs
from src.scripts.make_fixtures import write_fixtures
from src.utils.seeding import make_rng
from pathlib import Path
import numpy as np
import pytest

GOLDEN_DIR = Path(__file__).parent / "golden"
DESK_COV = [[0.0025, 0.0004], [0.0004, 0.0025]]


@pytest.fixture(autouse=True)
def serial_pool():
    WorkerPool.close()
    yield
    WorkerPool.close()


@pytest.fixture
def canonical_pairs() -> SensitivityPairs:
    rows = make_rng(7, 0).multivariate_normal([0.0, 0.0], DESK_COV, size=15)
    return SensitivityPairs(rows=rows)


@pytest.fixture
def small_pairs() -> SensitivityPairs:
    return SensitivityPairs(rows=[(0.01, 0.02), (-0.03, 0.01), (0.02, -0.01)])


@pytest.fixture
def hyper() -> NiwHyperparams:
    return NiwHyperparams(delta0=0.005, psi=[[0.004, 0.001], [0.001, 0.003]], nu=4.0)


@pytest.fixture
def summary() -> OutcomeSummary:
    return OutcomeSummary(p_obs=0.1, sd_y=1.1, n=2500)


@pytest.fixture
def unit_batch() -> MissingDataBatch:
    rng = make_rng(11, 0)
    n = 5000
    pi = np.clip(rng.beta(4.0, 36.0, size=n), 0.05, 1.0)
    r = (rng.random(n) < pi).astype(int)
    y = rng.lognormal(1.076, 0.35, size=n)
    return MissingDataBatch(y=y, r=r, pi=pi)


@pytest.fixture
def fixture_files(tmp_path):
    return write_fixtures(tmp_path / "fixtures", seed=2024, n_per_event=300)


@pytest.fixture
def run_cli(capsys):
    """Run the CLI in-process; returns (exit code, stdout, stderr)."""

    def run(*argv):
        code = main([str(a) for a in argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return run
