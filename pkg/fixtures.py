"""
Test Fixtures
Provides reusable fixtures for all tests

ARCHITECTURE NOTE:
- All pytest fixtures are defined HERE (single source of truth)
- Fixtures are imported in conftest.py via "from fixtures import *"
"""

from pathlib import Path

import pytest

from engine.dist_core import sample
from engine.streams import substream
from models.distributions import LogNormalTail, ParetoTail
from models.panel import SizeSample
from models.run_config import RunConfig
from models.types import Subcommand

DATA_DIR = Path(__file__).parent / "tests" / "data"
GOLDEN_DIR = DATA_DIR / "golden"


# ==================== Data Files ====================

@pytest.fixture(scope="session")
def data_dir():
    """Directory of the shipped fixture files"""
    return DATA_DIR


@pytest.fixture(scope="session")
def three_row_fund_file():
    return DATA_DIR / "funds_three_rows.csv"


@pytest.fixture(scope="session")
def three_month_cpi_file():
    return DATA_DIR / "cpi_three_months.csv"


@pytest.fixture(scope="session")
def small_panel_files():
    """Hand-enumerated 1993-1995 panel and its CPI table"""
    return DATA_DIR / "panel_1993_1995.csv", DATA_DIR / "cpi_1993_1995.csv"


@pytest.fixture(scope="session")
def synthetic_panel_files():
    """400-fund 2001-2004 panel (2004 has June records only) and a monthly CPI table"""
    return DATA_DIR / "synthetic_panel.csv", DATA_DIR / "cpi_monthly.csv"


@pytest.fixture(scope="session")
def sample_100_file():
    return DATA_DIR / "sample_100.csv"


@pytest.fixture
def golden(request):
    """
    Byte comparison against tests/data/golden/<name>

    A missing golden file, or any file under --update-golden, is written from
    the current output and the test is skipped so the freeze is visible.
    """
    update = request.config.getoption("--update-golden")

    def check(name: str, actual: bytes) -> None:
        path = GOLDEN_DIR / name
        if update or not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(actual)
            pytest.skip(f"golden file {name} written; rerun to compare")
        assert actual == path.read_bytes(), f"output differs from golden file {name}"

    return check


# ==================== Models and Samples ====================

@pytest.fixture(scope="session")
def table_pareto():
    """Power law with the cross-year mean exponent and cutoff of US equity funds"""
    return ParetoTail(zeta=1.09, s_min=974.0)


@pytest.fixture(scope="session")
def table_lognormal():
    """Truncated log-normal fitted to the 1998 tail"""
    return LogNormalTail(mu=2.34, sigma=2.5, s_min=1945.0)


@pytest.fixture(scope="session")
def pareto_sample(table_pareto):
    """5000 seeded power-law draws"""
    return SizeSample.from_values(sample(table_pareto, 5000, substream(11)))


@pytest.fixture(scope="session")
def lognormal_sample():
    """5000 seeded untruncated log-normal draws"""
    return SizeSample.from_values(sample(LogNormalTail(mu=4.0, sigma=1.5), 5000, substream(12)))


@pytest.fixture
def report_config(tmp_path):
    """Small-replicate report configuration writing under tmp_path"""
    def build(**overrides):
        values = {
            'subcommand': Subcommand.REPORT,
            'input_path': DATA_DIR / "synthetic_panel.csv",
            'cpi_path': DATA_DIR / "cpi_monthly.csv",
            'output_dir': tmp_path,
            'n_replicates': 20,
            'master_seed': 5,
            'worker_count': 1,
        }
        values.update(overrides)
        return RunConfig(**values)
    return build
