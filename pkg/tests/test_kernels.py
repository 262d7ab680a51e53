import importlib
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphdfm import _kernels_py as py
from graphdfm import ctmc, kernels
from graphdfm.ctmc import RateConfig

cy = pytest.importorskip("graphdfm._kernels")


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(py.DB_DESIGNS))
def test_rate_table_backends_agree_with_reference_rows(seed, design):
    rng = np.random.default_rng(seed)
    Z = int(rng.integers(2, 7))
    p0 = rng.dirichlet(np.ones(Z))
    if rng.random() < 0.3:
        p0[int(rng.integers(Z))] = 0
        p0 /= p0.sum()
    t, omega, eta = float(rng.random()), float(rng.random()), float(rng.random() * 3)
    anchor = ctmc.db_anchor(p0)
    a = py.rate_table(p0, t, omega, eta, design, anchor, Z)
    b = cy.rate_table(p0, t, omega, eta, design, anchor, Z)
    assert np.allclose(a, b, atol=1e-12, rtol=1e-12)
    cfg = RateConfig(omega=omega, eta=eta, db_design=design)
    for z1 in range(Z):
        for z in range(Z):
            assert np.allclose(a[z1, z], ctmc.combined_row(z, z1, p0, t, cfg), atol=1e-12, rtol=1e-12)


def test_expected_rates_and_categorical_agree(rng):
    p0 = rng.dirichlet(np.ones(4))
    table = py.rate_table(p0, 0.4, 0.1, 1.0, "general", 0, 4)
    states = rng.integers(0, 4, size=50)
    post = rng.dirichlet(np.ones(4), size=50)
    assert np.allclose(py.expected_rates(states, post, table), cy.expected_rates(states, post, table))
    u = rng.random(50)
    assert np.array_equal(py.categorical(post, u), cy.categorical(post, u))


def test_categorical_boundaries():
    probs = np.array([[0.5, 0.5], [0.0, 1.0], [1.0, 0.0]])
    for impl in (py, cy):
        assert impl.categorical(probs, np.array([0.0, 0.0, 0.999999])).tolist() == [0, 1, 0]
        assert impl.categorical(probs, np.array([0.5, 0.3, 0.2])).tolist() == [1, 1, 0]


def test_read_only_inputs():
    p0 = np.array([0.5, 0.5])
    p0.setflags(write=False)
    cy.rate_table(p0, 0.5, 0.0, 0.0, "general", 0, 2)


def test_pure_python_switch():
    code = "from graphdfm import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, GRAPHDFM_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert kernels.BACKEND == ("python" if os.environ.get("GRAPHDFM_PURE_PYTHON") else "cython")
