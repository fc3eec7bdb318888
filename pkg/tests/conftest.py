import numpy as np
import pytest

from aklt_percolation import lattices as lt


@pytest.fixture(scope="session")
def k4():
    return lt.complete_graph_k4()


@pytest.fixture(scope="session")
def cube():
    return lt.cube_graph()


@pytest.fixture(scope="session")
def prism():
    return lt.bridged_triangles()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
