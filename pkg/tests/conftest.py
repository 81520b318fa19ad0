import os
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)
sys.path.insert(0, os.path.join(ROOT, "src"))

from gather_grid import GridGathering  # noqa: E402
from gather_hypercube import HypercubeGathering  # noqa: E402
from swarm import CanonicalResolver, SwarmEngine  # noqa: E402
from topology import Hypercube, SquareGrid  # noqa: E402


@pytest.fixture(autouse=True)
def isolated_dirs(tmp_path, monkeypatch):
    """Run every test in its own directory so logs and artifacts stay out of the tree."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("OUTPUT_DIR", str(tmp_path / "artifacts"))
    for name in ("LOG_LEVEL", "HORIZON_EPOCHS", "MAX_MULTIPLICITY", "SWEEP_WORKERS", "MAX_SWEEP_INSTANCES"):
        monkeypatch.delenv(name, raising=False)
    return tmp_path


@pytest.fixture
def q3():
    return Hypercube(3)


@pytest.fixture
def q4():
    return Hypercube(4)


@pytest.fixture
def grid():
    return SquareGrid()


@pytest.fixture
def hypercube_algorithm():
    return HypercubeGathering()


@pytest.fixture
def grid_algorithm():
    return GridGathering()


@pytest.fixture
def q3_engine(q3, hypercube_algorithm, tmp_path):
    return SwarmEngine(q3, hypercube_algorithm, CanonicalResolver(), log_dir=str(tmp_path / "logs"))


@pytest.fixture
def grid_engine(grid, grid_algorithm, tmp_path):
    return SwarmEngine(grid, grid_algorithm, CanonicalResolver(), log_dir=str(tmp_path / "logs"))
