import numpy as np
import pytest

from graphdfm.datasets import SynthSpec, generate, toy_fixture
from graphdfm.metrics import is_connected, is_connected_planar, is_tree


@pytest.mark.parametrize("seed", range(3))
def test_trees(seed):
    ds = generate(SynthSpec("tree", 30, 2, 12, seed=seed))
    assert all(is_tree(g) for g in ds)
    assert ds.node_counts().min() >= 2 and ds.node_counts().max() <= 12


def test_planar():
    ds = generate(SynthSpec("planar", 30, 3, 25, seed=1))
    assert all(is_connected_planar(g) for g in ds)


def test_sbm():
    ds = generate(SynthSpec("sbm-like", 10, 10, 14, seed=0))
    assert len(ds) == 10 and ds.e_card == 2


def test_deterministic():
    a = generate(SynthSpec("planar", 5, 5, 9, seed=4))
    b = generate(SynthSpec("planar", 5, 5, 9, seed=4))
    assert a.graphs == b.graphs


def test_toy_fixture():
    ds = generate(SynthSpec("toy-enumerable"))
    assert ds.graphs == toy_fixture().graphs
    assert ds.graphs[0].node_states.tolist() == [0, 0] and ds.graphs[0].edge_states.tolist() == [1]
    assert ds.graphs[1].node_states.tolist() == [1, 1] and ds.graphs[1].edge_states.tolist() == [0]


def test_labels_split_on_median_density():
    ds = generate(SynthSpec("sbm-like", 20, 8, 8, seed=2, labels=True))
    dens = np.array([(g.edge_states != 0).mean() for g in ds])
    assert all((d > np.median(dens)) == bool(lab) for d, lab in zip(dens, ds.labels))


@pytest.mark.parametrize("kw", [dict(family="grid"), dict(n_min=5, n_max=4), dict(family="planar", n_min=2)])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        SynthSpec(**kw)
