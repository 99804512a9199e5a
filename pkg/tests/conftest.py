import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).parent.parent.resolve()
sys.path.insert(0, str(ROOT))
sys.path.insert(0, str(ROOT / "irsa_mpr"))

from degree_dist import DegreeDistribution, load_distribution  # noqa: E402
from design import build_theorem1_dist  # noqa: E402

DISTRIBUTIONS = ROOT / "irsa_mpr" / "distributions"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo acceptance runs (minutes)")


@pytest.fixture
def lambda2() -> DegreeDistribution:
    return load_distribution(DISTRIBUTIONS / "lambda2.json")


@pytest.fixture
def lambda3() -> DegreeDistribution:
    return load_distribution(DISTRIBUTIONS / "lambda3.json")


@pytest.fixture
def lambda1() -> DegreeDistribution:
    return build_theorem1_dist(1.73, 5)


@pytest.fixture
def regular2() -> DegreeDistribution:
    return DegreeDistribution.regular(2)
