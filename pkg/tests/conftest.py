import networkx as nx
import pytest

from walktrace.graph_tools import CompleteGraph, MultiGraph
from walktrace.random_models import SeedStream


def multigraph_from_nx(H: nx.Graph) -> MultiGraph:
    """Relabel a networkx graph to 1..n."""
    labels = {v: i + 1 for i, v in enumerate(sorted(H.nodes()))}
    return MultiGraph.from_edges(H.number_of_nodes(), [(labels[u], labels[v]) for u, v in H.edges()])


@pytest.fixture
def from_nx():
    return multigraph_from_nx


@pytest.fixture
def path5():
    return MultiGraph.from_edges(5, [(1, 2), (2, 3), (3, 4), (4, 5)])


@pytest.fixture
def cycle6():
    return MultiGraph.from_edges(6, [(i, i % 6 + 1) for i in range(1, 7)])


@pytest.fixture
def star():
    return MultiGraph.from_edges(6, [(1, v) for v in range(2, 7)])


@pytest.fixture
def petersen():
    return multigraph_from_nx(nx.petersen_graph())


@pytest.fixture
def k6():
    return CompleteGraph(6)


@pytest.fixture
def seed():
    return SeedStream(20240611)
