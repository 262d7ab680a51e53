import itertools

import networkx as nx
import numpy as np
import pytest

from graphdfm import metrics
from graphdfm.graph import GraphDataset, permute
from graphdfm.planarity import kuratowski_nonplanar, lr_planar

from conftest import complete, edges_graph, k33, path, random_graph


def test_tree_predicate():
    assert metrics.is_tree(path(4))
    assert not metrics.is_tree(complete(3))
    assert not metrics.is_tree(edges_graph(4, [(0, 1), (2, 3)]))
    assert metrics.is_tree(edges_graph(1, []))


def test_planarity_known_graphs():
    assert metrics.is_planar(complete(4))
    assert not metrics.is_planar(complete(5))
    assert not metrics.is_planar(k33())
    petersen = nx.petersen_graph()
    assert not lr_planar(10, petersen.edges())
    assert lr_planar(8, [(i, (i + 1) % 8) for i in range(8)] + [(0, 4)])


def test_planarity_three_way(rng):
    """Left-right test vs brute-force Kuratowski search vs networkx."""
    for _ in range(300):
        n = int(rng.integers(5, 8))
        m = int(rng.integers(n, 3 * n - 5))
        pairs = list(itertools.combinations(range(n), 2))
        edges = [pairs[k] for k in rng.choice(len(pairs), size=min(m, len(pairs)), replace=False)]
        ref = nx.check_planarity(nx.Graph(edges))[0] if edges else True
        assert lr_planar(n, edges) == ref
        assert (not kuratowski_nonplanar(n, edges)) == ref


def test_planarity_larger_graphs(rng):
    for _ in range(40):
        n = int(rng.integers(15, 40))
        g = nx.gnm_random_graph(n, int(rng.integers(n, 3 * n)), seed=int(rng.integers(1 << 30)))
        assert lr_planar(n, g.edges()) == nx.check_planarity(g)[0]


def test_kuratowski_cap():
    with pytest.raises(ValueError):
        kuratowski_nonplanar(9, [])


def test_graph_stats():
    s = metrics.graph_stats(complete(3))
    assert np.allclose(s.clustering, 1)
    s = metrics.graph_stats(path(3))
    assert s.degree_hist.tolist() == [0, 2, 1]
    assert np.allclose(metrics.graph_stats(path(2)).spectrum, [0, 2], atol=1e-9)


def test_stats_permutation_invariant(rng):
    g = random_graph(rng, 7, 1, 2)
    h = permute(g, rng.permutation(7))
    a, b = metrics.graph_stats(g), metrics.graph_stats(h)
    assert np.array_equal(a.degree_hist, b.degree_hist)
    assert np.allclose(np.sort(a.clustering), np.sort(b.clustering))
    assert np.allclose(a.spectrum, b.spectrum)


def test_mmd_properties(rng):
    a, b = rng.random((6, 4)), rng.random((5, 4)) + 0.5
    assert abs(metrics.mmd2(a, a, 1.0, biased=True)) < 1e-12
    assert np.isclose(metrics.mmd2(a, b, 0.7), metrics.mmd2(b, a, 0.7))
    far = metrics.mmd2([[0.0]], [[1e6]], 1.0)
    assert np.isclose(far, 2.0)
    with pytest.raises(ValueError):
        metrics.mmd2([], a, 1.0)


def test_vun():
    train = GraphDataset([path(5)], 1, 2)
    copies = [path(5)] * 4
    r = metrics.vun(copies, train, metrics.is_tree)
    assert r.novel_frac == 0 and r.unique_frac == 0.25 and r.valid_frac == 1 and r.vun_frac == 0
    star = edges_graph(5, [(0, k) for k in range(1, 5)])
    fork = edges_graph(5, [(0, 1), (1, 2), (2, 3), (2, 4)])
    r = metrics.vun([star, fork], train, metrics.is_tree)
    assert r.vun_frac == 1
    assert r.vun_frac <= min(r.valid_frac, r.unique_frac, r.novel_frac)


def test_ratio(rng):
    train = [random_graph(rng, 8, 1, 2, 0.3) for _ in range(10)]
    test = [random_graph(rng, 8, 1, 2, 0.5) for _ in range(10)]
    assert abs(metrics.ratio_metric(train, test, train) - 1) < 1e-9


def test_ratio_drops_zero_statistics():
    gen_test = metrics.MmdReport({"degree": 0.4, "clustering": 0.3, "spectral": 0.2})
    train_test = metrics.MmdReport({"degree": 0.2, "clustering": 0.0, "spectral": 0.1})
    ratio, used = metrics.ratio_from_reports(gen_test, train_test)
    assert used == ["degree", "spectral"] and np.isclose(ratio, 2.0)
    scaled = metrics.MmdReport({k: 3 * v for k, v in gen_test.mmd2.items()})
    scaled_t = metrics.MmdReport({k: 3 * v for k, v in train_test.mmd2.items()})
    assert np.isclose(metrics.ratio_from_reports(scaled, scaled_t)[0], ratio)
    with pytest.raises(ValueError):
        metrics.ratio_from_reports(gen_test, metrics.MmdReport({"degree": 0.0}))


def test_report_is_permutation_invariant(rng):
    train = GraphDataset([random_graph(rng, 6, 1, 2) for _ in range(6)], 1, 2)
    test = GraphDataset([random_graph(rng, 6, 1, 2, 0.6) for _ in range(6)], 1, 2)
    gen = [random_graph(rng, 6, 1, 2, 0.5) for _ in range(6)]
    a = metrics.evaluate(gen, train, test, "any")
    b = metrics.evaluate([permute(g, rng.permutation(6)) for g in gen], train, test, "any")
    for k, v in a.items():
        assert np.allclose(v, b[k]) if isinstance(v, float) else v == b[k]
    rows = metrics.report_csv(a).strip().splitlines()
    assert len(rows) - 1 == sum(isinstance(v, (int, float)) for v in a.values())
