"""
Shared fixtures for the Colourspace test suite
"""

import numpy as np
import pytest

from colourspace.cache import get_shared_cache
from colourspace.graphs import complete_graph, cycle_graph, path_graph, star_graph


@pytest.fixture(autouse=True)
def fresh_cache():
    """Each test starts from an empty instance cache"""
    get_shared_cache().clear()
    yield
    get_shared_cache().clear()


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


@pytest.fixture
def c5():
    return cycle_graph(5)


@pytest.fixture
def p4():
    return path_graph(4)


@pytest.fixture
def k3():
    return complete_graph(3)


@pytest.fixture
def star7():
    """K_{1,6}: centre 0 and six leaves"""
    return star_graph(6)
