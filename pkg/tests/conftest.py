import itertools

import hypothesis.strategies as st
from hypothesis import HealthCheck, settings

from bdgrowth.graph import Graph

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def connected_graphs(draw, min_n=1, max_n=6, weighted=False):
    """Random connected graph: a random spanning tree plus random extra edges."""
    n = draw(st.integers(min_n, max_n))
    edges = set()
    for v in range(1, n):
        u = draw(st.integers(0, v - 1))
        edges.add((u, v))
    extra = [e for e in itertools.combinations(range(n), 2) if e not in edges]
    if extra:
        edges |= set(draw(st.lists(st.sampled_from(extra), unique=True, max_size=len(extra))))
    ints = None
    if weighted:
        ints = draw(st.lists(st.integers(1, 3), min_size=n, max_size=n))
    return Graph(n, edges, ints)
