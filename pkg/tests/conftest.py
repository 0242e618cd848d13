import numpy as np
import pytest

from src.aeq_search.config import ENV_VARIABLES, get_settings
from src.aeq_search.enumeration import SearchConfig, enumerate_aeq
from src.aeq_search.graphcore import Graph


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    for name in ENV_VARIABLES:
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(20171211)


@pytest.fixture(scope="session")
def d2_result():
    return enumerate_aeq(SearchConfig(d=2, n_max=9))


@pytest.fixture(scope="session")
def d3_result():
    return enumerate_aeq(SearchConfig(d=3, n_max=12))


def cycle(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def random_graph(rng: np.random.Generator, n: int, p: float = 0.5) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p])
