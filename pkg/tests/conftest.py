import pytest

from citesim import fixtures


@pytest.fixture(scope="session")
def shared_graph():
    return fixtures.shared_neighbor_graph()


@pytest.fixture(scope="session")
def gap_graph():
    return fixtures.generation_gap_graph()


@pytest.fixture(scope="session")
def gap_ids(gap_graph):
    return {ext: gap_graph.id_of(ext) for ext in "abcdefghijkl"}
