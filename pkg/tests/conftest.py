import numpy as np
import pytest

from gbsdock.graphs import WeightedGraph


def random_graph(rng, n, density=0.5, max_weight=1.0) -> WeightedGraph:
    """Erdos-Renyi style graph with uniform random vertex weights."""
    a = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    a[iu] = (rng.random(len(iu[0])) < density).astype(float)
    a = a + a.T
    w = rng.random(n) * max_weight
    return WeightedGraph(a, w)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
