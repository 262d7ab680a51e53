import numpy as np
import pytest

from graphdfm.graph import CategoricalGraph, n_pairs


def random_graph(rng, n, x_card=2, e_card=2, density=0.4):
    nodes = rng.integers(0, x_card, size=n)
    m = n_pairs(n)
    edges = np.where(rng.random(m) < density, rng.integers(1, e_card, size=m) if e_card > 1 else 0, 0)
    return CategoricalGraph(n, nodes, edges, x_card, e_card)


def edges_graph(n, edges, x_card=1, e_card=2):
    return CategoricalGraph.from_edges([0] * n, [(i, j, 1) for i, j in edges], x_card, e_card)


def complete(n):
    return edges_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def k33():
    return edges_graph(6, [(a, b) for a in range(3) for b in range(3, 6)])


def path(n):
    return edges_graph(n, [(i, i + 1) for i in range(n - 1)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
