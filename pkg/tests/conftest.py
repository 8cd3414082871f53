"""Shared fixtures for the isingvote test suite."""

import logging
from pathlib import Path

import numpy as np
import pytest

from src.models.graph import build_graph, load_graph
from src.models.ising import Coupling, IsingModel
from src.shared.settings import get_settings

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def rng():
    """Seeded generator for reproducible draws."""
    return np.random.default_rng(20240611)


@pytest.fixture(autouse=True)
def fresh_settings():
    """Clear the cached settings around every test so env changes apply."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def package_logger():
    """Restore the package logger after a test configures it."""
    logger = logging.getLogger("src")
    handlers, level, propagate = logger.handlers[:], logger.level, logger.propagate
    yield logger
    logger.handlers[:] = handlers
    logger.setLevel(level)
    logger.propagate = propagate


@pytest.fixture
def custom_graph_path():
    """Path of a five-vertex custom graph: a triangle with a tail."""
    return DATA_DIR / "triangle_tail.txt"


@pytest.fixture
def custom_model(custom_graph_path):
    """Edgewise model on the triangle-with-tail graph."""
    return IsingModel(load_graph(custom_graph_path), 0.3)


@pytest.fixture
def empty3():
    return IsingModel(build_graph("empty", 3), 1.0)


@pytest.fixture
def chain_pbc5():
    return IsingModel(build_graph("chain-pbc", 5), 0.5)


@pytest.fixture
def curie_weiss_factory():
    """Build Curie-Weiss models on the complete graph."""

    def make(n: int, theta: float) -> IsingModel:
        return IsingModel(build_graph("complete", n), theta, Coupling.CURIE_WEISS)

    return make
