import numpy as np
import pytest

from graphdfm import ctmc
from graphdfm.ctmc import RateConfig, StepTooLargeError
from graphdfm.denoiser import ProbGraph
from graphdfm.graph import CategoricalGraph
from graphdfm.initial import InitialDistribution, build_initial
from graphdfm.verify import guidance_expected_residual, random_tuple


def is_generator_row(row, z):
    off = np.delete(row, z)
    return off.min() >= 0 and abs(row.sum()) < 1e-12


def test_rstar_hand_example():
    # p0 uniform on 2 states, z1 = 0, t = 0.5: p = (0.75, 0.25), d = (0.5, -0.5)
    p0 = np.array([0.5, 0.5])
    row = ctmc.rstar_row(1, 0, p0, 0.5)
    assert np.allclose(row, [1.0 / (2 * 0.25), -1.0 / (2 * 0.25)])
    assert np.allclose(ctmc.rstar_row(0, 0, p0, 0.5), 0)


def test_rows_are_generators(rng):
    for _ in range(300):
        z1, p0, t, _ = random_tuple(rng)
        for z in range(p0.size):
            for cfg in (RateConfig(), RateConfig(omega=0.3, eta=2.0, db_design="column_x1")):
                assert is_generator_row(ctmc.combined_row(z, z1, p0, t, cfg), z)


def test_rstar_never_targets_dead_states():
    p0 = np.array([0.0, 0.5, 0.5])
    row = ctmc.rstar_row(1, 2, p0, 0.3)
    assert row[0] == 0


def test_dead_rows_are_zero():
    p0 = np.array([0.0, 1.0])
    # z1 = 1 and p0 puts no mass on 0: state 0 is dead
    for fn in (lambda: ctmc.rstar_row(0, 1, p0, 0.4), lambda: ctmc.db_row(0, 1, p0, 0.4),
               lambda: ctmc.guidance_row(0, 1, p0, 0.4, 1.0)):
        assert np.all(fn() == 0)


def test_guidance_residual_hand_value():
    p0 = np.array([0.2, 0.3, 0.5])
    res = ctmc.kolmogorov_residual(lambda z, z1, p, t: ctmc.combined_row(z, z1, p, t, RateConfig(omega=0.3)),
                                   1, p0, 0.4)
    assert np.allclose(res, [-0.1, 0.2, -0.1], atol=1e-12)
    assert np.allclose(res, guidance_expected_residual(1, p0, 0.4, 0.3))


def test_entry_design_pattern():
    p0 = np.array([0.6, 0.3, 0.1])
    assert np.all(ctmc.db_row(2, 0, p0, 0.5, "entry_max_marginal") == 0)  # anchor == z1
    row = ctmc.db_row(0, 2, p0, 0.5, "entry_max_marginal")
    assert row[2] > 0 and row[1] == 0


def test_unknown_design():
    with pytest.raises(ValueError):
        RateConfig(db_design="row_x1")
    with pytest.raises(ValueError):
        RateConfig(omega=-1)


def _toy_init():
    return InitialDistribution("marginal", np.array([0.5, 0.5]), np.array([0.5, 0.5]), 2, 2)


def test_final_step_samples_posterior(rng):
    init = _toy_init()
    g = CategoricalGraph(2, [0, 1], [1], 2, 2)
    post = ProbGraph(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([[1.0, 0.0]]))
    out = ctmc.euler_step(g, post, 0.9, 0.1, RateConfig(), init, rng)
    assert out.node_states.tolist() == [1, 0] and out.edge_states.tolist() == [0]


def test_final_step_leaves_noisy_space():
    ds_init = build_initial("masking", x_card=2, e_card=2)
    g = CategoricalGraph(2, [2, 2], [2], 3, 3)
    post = ProbGraph(np.full((2, 2), 0.5), np.full((1, 2), 0.5))
    out = ctmc.euler_step(g, post, 0.5, 0.5, RateConfig(), ds_init, np.random.default_rng(0))
    assert (out.x_card, out.e_card) == (2, 2)


def test_step_too_large():
    init = _toy_init()
    g = CategoricalGraph(2, [1, 1], [1], 2, 2)
    post = ProbGraph(np.array([[1.0, 0.0]] * 2), np.array([[1.0, 0.0]]))
    # guidance rate 10 / (2 * 0.25) = 20 toward z1 = 0; dt = 0.2 gives self-probability -3
    with pytest.raises(StepTooLargeError):
        ctmc.euler_step(g, post, 0.5, 0.2, RateConfig(omega=10.0), init, np.random.default_rng(0))


def test_step_distribution_matches_kernel():
    """Sampled one-step transitions agree with the exact per-dimension kernel."""
    init = _toy_init()
    g = CategoricalGraph(2, [1, 0], [1], 2, 2)
    post = ProbGraph(np.array([[0.7, 0.3], [0.2, 0.8]]), np.array([[0.6, 0.4]]))
    cfg = RateConfig(eta=0.5)
    t, dt = 0.3, 0.2
    node_tab, edge_tab = ctmc.block_tables(init, t, cfg)
    exact = ctmc.dimension_kernels(g.node_states, post.node_probs, node_tab, dt, cfg)
    rng = np.random.default_rng(1)
    draws = np.array([ctmc.euler_step(g, post, t, dt, cfg, init, rng).node_states for _ in range(20000)])
    emp = np.array([[np.mean(draws[:, d] == s) for s in range(2)] for d in range(2)])
    assert np.abs(emp - exact).max() < 0.015


def test_exact_expectation_kernel_is_stochastic():
    init = _toy_init()
    node_tab, _ = ctmc.block_tables(init, 0.2, RateConfig(exact_expectation=True))
    k = ctmc.dimension_kernels(np.array([0, 1]), np.array([[0.5, 0.5], [0.1, 0.9]]), node_tab, 0.1,
                               RateConfig(exact_expectation=True))
    assert np.allclose(k.sum(axis=1), 1) and k.min() >= 0
