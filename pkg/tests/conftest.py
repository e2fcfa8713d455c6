import logging

import numpy as np
import pytest

from chunkpart.config import get_settings
from chunkpart.graph import canonicalize
from chunkpart.graphgen import RmatParams, gen_er, gen_rmat
from chunkpart.ordering import Ordering


def path_graph(n):
    return canonicalize([(i, i + 1) for i in range(n - 1)])


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()
    # the CLI installs its own handler; hand records back to caplog
    logger = logging.getLogger("chunkpart")
    logger.handlers.clear()
    logger.propagate = True
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def make_path():
    return path_graph


@pytest.fixture
def triangle():
    return canonicalize([(0, 1), (1, 2), (2, 0)])


@pytest.fixture
def path3():
    """a-b-c"""
    return path_graph(3)


@pytest.fixture
def path5():
    """a-b-c-d-e, four edges"""
    return path_graph(5)


@pytest.fixture
def chain14():
    """Fourteen edges, the smallest case with uneven chunks at k=4."""
    return path_graph(15)


@pytest.fixture
def star():
    return canonicalize([(0, leaf) for leaf in range(1, 9)])


@pytest.fixture
def small_er():
    return canonicalize(gen_er(40, 120, seed=3))


@pytest.fixture
def small_rmat():
    return canonicalize(gen_rmat(RmatParams(scale=8, edge_factor=8, seed=5)))


@pytest.fixture
def identity():
    def make(graph):
        return Ordering.from_permutation(np.arange(graph.edge_count))

    return make
