import itertools
import os

import pytest
from hypothesis import settings, strategies as st

from topocomm.graph import Graph

settings.register_profile("ci", deadline=None, max_examples=60)
settings.load_profile("ci")

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURE_DIR, name)


@st.composite
def connected_graphs(draw, min_n=2, max_n=7):
    """Random connected graph: a random spanning tree plus extra edges."""
    n = draw(st.integers(min_n, max_n))
    tree = [(draw(st.integers(0, v - 1)), v) for v in range(1, n)]
    pool = [e for e in itertools.combinations(range(n), 2) if e not in set(tree)]
    extra = []
    if pool:
        mask = draw(st.integers(0, 2 ** len(pool) - 1))
        extra = [e for i, e in enumerate(pool) if (mask >> i) & 1]
    return Graph(n, tuple(tree + extra))


@st.composite
def graphs_with_terminals(draw, min_n=2, max_n=7, min_k=2, max_k=5):
    g = draw(connected_graphs(min_n=min_n, max_n=max_n))
    k = draw(st.integers(min_k, min(max_k, g.vertex_count)))
    K = draw(
        st.lists(
            st.integers(0, g.vertex_count - 1), min_size=k, max_size=k, unique=True
        )
    )
    return g, sorted(K)


@pytest.fixture
def triangle():
    return Graph(3, ((0, 1), (1, 2), (0, 2)))
