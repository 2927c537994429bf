import pytest

from src.chart.fixtures import FIXTURES
from src.chart.quadrature import GridQuadrature
from src.grassmann.model import build_model
from src.tensor_alg.hermitian import HermitianModel


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte-Carlo and quadrature heavy acceptance runs")


@pytest.fixture(scope="session")
def quat_models():
    return {n: HermitianModel.quaternionic(n) for n in (1, 2, 3)}


@pytest.fixture(scope="session")
def quat4(quat_models):
    # complex dimension m = 4
    return quat_models[2]


@pytest.fixture(scope="session")
def grassmann_models():
    return {n: build_model(n) for n in (2, 3)}


@pytest.fixture(scope="session")
def chart_metrics():
    return {name: make() for name, make in FIXTURES.items()}


@pytest.fixture(scope="session")
def torus_grid():
    return GridQuadrature(3, 9)
