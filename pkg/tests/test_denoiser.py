import numpy as np
import pytest

from graphdfm.datasets import toy_fixture
from graphdfm.denoiser import (DenoiserParams, FeaturizedDenoiser, OracleDenoiser, ProbGraph, loss_and_grad,
                               oracle_posterior, permutation_closure, predict, rrwp)
from graphdfm.graph import CategoricalGraph, GraphDataset, permute
from graphdfm.initial import build_initial
from graphdfm.training import ce_lambda, noise_graph

from conftest import path, random_graph


def test_rrwp_path():
    f = rrwp(path(3), K=3)
    # M = [[0,1,0],[.5,0,.5],[0,1,0]]; diag(M^2) = (.5, 1, .5)
    assert np.allclose(f.node_feats[:, 0], 1)
    assert np.allclose(f.node_feats[:, 1], 0)
    assert np.allclose(f.node_feats[:, 2], [0.5, 1.0, 0.5])
    # pair (0,1): M01 = 1, M10 = .5 -> mean .75
    assert np.isclose(f.edge_feats[0, 1], 0.75)


def test_rrwp_isolated_nodes_are_zero():
    g = CategoricalGraph(3, [0, 0, 0], [1, 0, 0], 1, 2)
    f = rrwp(g, K=4)
    assert np.allclose(f.node_feats[2, 1:], 0)


def test_rrwp_equivariant(rng):
    for _ in range(20):
        g = random_graph(rng, 6)
        sigma = rng.permutation(6)
        a, b = rrwp(g), rrwp(permute(g, sigma))
        inv = np.argsort(sigma)
        assert np.allclose(b.node_feats, a.node_feats[inv], atol=1e-14)
        from graphdfm.graph import permute_pairs
        assert np.allclose(b.edge_feats, permute_pairs(sigma, a.edge_feats), atol=1e-14)


def test_oracle_endpoints():
    ds = toy_fixture()
    init = build_initial("marginal", ds)
    g1 = ds.graphs[0]
    post = oracle_posterior(g1.with_cards(2, 2), 1.0 - 1e-12, ds, init)
    assert np.allclose(post.node_probs[:, 0], 1) and np.allclose(post.edge_probs[0], [0, 1])
    # t = 0: prior over the two atoms, equal weights
    post0 = oracle_posterior(g1, 0.0, ds, init)
    assert np.allclose(post0.node_probs, 0.5)


def test_oracle_bayes_by_hand():
    ds = toy_fixture()
    init = build_initial("masking", ds)
    # one node unmasked as 0 at t: only atom 0 is consistent
    g = CategoricalGraph(2, [0, 2], [2], 3, 3)
    post = oracle_posterior(g, 0.3, ds, init)
    assert np.allclose(post.edge_probs, [[0, 1]])


def test_oracle_zero_likelihood_falls_back_to_prior():
    ds = toy_fixture()
    init = build_initial("absorbing", ds)
    g = CategoricalGraph(2, [0, 1], [1], 2, 2)  # node 1 says atom 1, node 0 says atom 0 at t = 1-
    post = oracle_posterior(g, 0.999, ds, init)
    assert np.allclose(post.node_probs, 0.5)


def test_permutation_closure_weights():
    ds = GraphDataset([path(3)], 1, 2)
    c = permutation_closure(ds)
    assert len(c) == 3 and np.isclose(c.meta["weights"].sum(), 1)


def _params(rng, x=2, e=3, labels=0):
    return DenoiserParams.init(x, e, x, e, rrwp_depth=4, hidden=5, n_labels=labels, rng=rng, scale=1.5)


def test_predict_outputs_simplexes(rng):
    p = _params(rng)
    out = predict(p, random_graph(rng, 5, 2, 3), 0.4)
    out.validate()
    assert out.node_probs.shape == (5, 2) and out.edge_probs.shape == (10, 3)


def test_predict_equivariant(rng):
    p = _params(rng, labels=2)
    for _ in range(20):
        g = random_graph(rng, 6, 2, 3)
        sigma = rng.permutation(6)
        a = predict(p, g, 0.3, 1).permuted(sigma)
        b = predict(p, permute(g, sigma), 0.3, 1)
        assert np.abs(a.node_probs - b.node_probs).max() < 1e-12
        assert np.abs(a.edge_probs - b.edge_probs).max() < 1e-12


def test_zero_init_is_uniform():
    p = DenoiserParams.init(2, 3, rrwp_depth=2, hidden=3)
    out = predict(p, CategoricalGraph(3, [0, 1, 0], [0, 2, 1], 2, 3), 0.5)
    assert np.allclose(out.edge_probs, 1 / 3)


def test_gradient_matches_finite_differences(rng):
    p = _params(rng, labels=2)
    batch = []
    for k in range(3):
        g1 = random_graph(rng, 4, 2, 3)
        batch.append((g1, random_graph(rng, 4, 2, 3), float(rng.random()), [None, 0, 1][k]))
    loss, grads = loss_and_grad(p, batch, lam=2.5)
    # loss equals the per-item ce_lambda mean
    ref = np.mean([ce_lambda(g1, predict(p, gt, t, lab), 2.5) for g1, gt, t, lab in batch])
    assert np.isclose(loss, ref, rtol=1e-12)
    h = 1e-6
    worst = 0.0
    for name, arr in p.tensors.items():
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + h
            up = loss_and_grad(p, batch, 2.5)[0]
            arr[idx] = old - h
            dn = loss_and_grad(p, batch, 2.5)[0]
            arr[idx] = old
            fd = (up - dn) / (2 * h)
            worst = max(worst, abs(fd - grads[name][idx]) / max(abs(fd), abs(grads[name][idx]), 1e-4))
    assert worst < 1e-5


def test_checkpoint_roundtrip(tmp_path, rng):
    p = _params(rng, labels=2)
    p.save(tmp_path / "c.json", extra={"note": 1})
    q = DenoiserParams.load(tmp_path / "c.json")
    assert all(np.array_equal(p.tensors[k], q.tensors[k]) for k in p.tensors)
    (tmp_path / "bad.json").write_text('{"format": "other"}')
    with pytest.raises(ValueError):
        DenoiserParams.load(tmp_path / "bad.json")


def test_cardinality_mismatch(rng):
    p = _params(rng)
    with pytest.raises(ValueError):
        predict(p, random_graph(rng, 3, 2, 2), 0.1)


def test_masking_inputs(rng):
    ds = toy_fixture()
    init = build_initial("masking", ds)
    p = DenoiserParams.init(2, 2, init.node_states, init.edge_states, rrwp_depth=3, hidden=4, rng=rng)
    g_t = noise_graph(ds.graphs[0], 0.5, init, rng)
    out = FeaturizedDenoiser(p).predict(g_t, 0.5)
    assert out.node_probs.shape == (2, 2) and out.edge_probs.shape == (1, 2)


def test_probgraph_argmax():
    pg = ProbGraph(np.array([[0.2, 0.8], [0.9, 0.1]]), np.array([[0.3, 0.7]]))
    g = pg.argmax_graph()
    assert g.node_states.tolist() == [1, 0] and g.edge_states.tolist() == [1]
