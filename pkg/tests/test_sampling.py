import numpy as np
import pytest

from graphdfm.ctmc import RateConfig
from graphdfm.datasets import toy_fixture
from graphdfm.denoiser import DenoiserParams, FeaturizedDenoiser, OracleDenoiser, ProbGraph
from graphdfm.initial import build_initial
from graphdfm.sampling import (GuidedDenoiser, SampleConfig, guided_posterior, node_count_histogram, sample,
                               sample_one)


def test_guided_posterior_endpoints_and_mix():
    c = ProbGraph(np.array([[0.8, 0.2]]), np.array([[0.5, 0.5]]))
    u = ProbGraph(np.array([[0.2, 0.8]]), np.array([[0.9, 0.1]]))
    assert np.allclose(guided_posterior(c, u, 1.0).node_probs, c.node_probs)
    assert np.allclose(guided_posterior(c, u, 0.0).edge_probs, u.edge_probs)
    g2 = guided_posterior(c, u, 2.0).node_probs[0]
    assert np.allclose(g2, np.array([0.8 ** 2 / 0.2, 0.2 ** 2 / 0.8]) / (3.2 + 0.05))
    with pytest.raises(ValueError):
        guided_posterior(c, u, -1.0)


def test_guided_posterior_disjoint_support():
    c = ProbGraph(np.array([[1.0, 0.0]]), np.zeros((0, 2)))
    u = ProbGraph(np.array([[0.0, 1.0]]), np.zeros((0, 2)))
    with pytest.raises(ValueError):
        guided_posterior(c, u, 0.5)


def test_oracle_sampling_reproduces_data():
    ds = toy_fixture()
    init = build_initial("masking", ds)
    oracle = OracleDenoiser(ds, init)
    graphs = sample(oracle, init, SampleConfig(n_steps=50, seed=3), 40, ds.node_counts())
    assert all(g in ds.graphs for g in graphs)
    assert 10 < sum(g == ds.graphs[0] for g in graphs) < 30


def test_seed_reproducible_and_index_stable():
    ds = toy_fixture()
    init = build_initial("marginal", ds)
    oracle = OracleDenoiser(ds, init)
    cfg = SampleConfig(n_steps=20, seed=11, rate=RateConfig(omega=0.1, eta=0.5))
    a = sample(oracle, init, cfg, 6, [2])
    assert a == sample(oracle, init, cfg, 6, [2])
    assert a[3:] == sample(oracle, init, cfg, 3, [2], start_index=3)


def test_guided_denoiser_label_selects_atoms():
    ds = toy_fixture()
    from graphdfm.graph import GraphDataset
    ds = GraphDataset(ds.graphs, 2, 2, labels=[1, 0])
    init = build_initial("masking", ds)
    den = GuidedDenoiser(OracleDenoiser(ds, init), label=1, gamma=2.0)
    graphs = sample(den, init, SampleConfig(n_steps=30, label=1), 10, [2])
    assert all(g == ds.graphs[0] for g in graphs)


def test_polydec_large_steps_split_instead_of_failing():
    """A marginal source with a rare state makes early steps overshoot; the sampler halves them."""
    from graphdfm.graph import CategoricalGraph, GraphDataset
    ds = GraphDataset([CategoricalGraph(2, [0, 0], [0], 2, 2)] * 99 + [CategoricalGraph(2, [1, 1], [1], 2, 2)], 2, 2)
    init = build_initial("marginal", ds)
    g = sample_one(OracleDenoiser(ds, init), init, SampleConfig(n_steps=3, sample_distortion="polydec",
                                                                   rate=RateConfig(omega=5.0)), 2,
                   np.random.default_rng(0))
    assert g.x_card == 2


def test_trajectory_ends_at_one():
    ds = toy_fixture()
    init = build_initial("uniform", ds)
    p = DenoiserParams.init(2, 2, rrwp_depth=2, hidden=3)
    traj = []
    sample_one(FeaturizedDenoiser(p), init, SampleConfig(n_steps=5, sample_distortion="cos"), 2,
               np.random.default_rng(0), traj)
    assert len(traj) == 5 and traj[-1][0] == 1.0


def test_node_count_histogram():
    sizes, probs = node_count_histogram([3, 3, 5, 6])
    assert sizes.tolist() == [3, 5, 6] and np.allclose(probs, [0.5, 0.25, 0.25])


def test_config_validation():
    with pytest.raises(ValueError):
        SampleConfig(n_steps=0)
    with pytest.raises(ValueError):
        SampleConfig(sample_distortion="linear")
