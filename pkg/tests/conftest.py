import networkx as nx
import pytest
from hypothesis import settings

from zigzag_proptest.structures import graph_structure, r_ball

# Jacobi sweeps and exhaustive searches have uneven running times
settings.register_profile("desk", deadline=None)
settings.load_profile("desk")


def ball_of(graph: nx.Graph, v: int, r: int):
    return r_ball(graph_structure(graph), v, r)


@pytest.fixture
def degree_one_type():
    """Center with a single neighbour, radius 1."""
    return ball_of(nx.path_graph(2), 0, 1)


@pytest.fixture
def isolated_type():
    return ball_of(nx.empty_graph(1), 0, 1)


@pytest.fixture
def k4_type():
    return ball_of(nx.complete_graph(4), 0, 1)


@pytest.fixture
def degree_two_type():
    """Center of a path, its two neighbours not adjacent."""
    return ball_of(nx.path_graph(3), 1, 1)
