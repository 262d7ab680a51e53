"""Conditional noising paths, rate matrices and the per-dimension Euler step.

The single-state functions (``rstar_row`` and friends) are the readable
reference definitions. Sampling goes through :mod:`graphdfm.kernels`, which
tabulates the same rows for every ``(z1, z_t)`` pair at once.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .graph import CategoricalGraph
from .initial import InitialDistribution

ALIVE_EPS = 1e-15
DB_DESIGNS = kernels.DB_DESIGNS


class StepTooLargeError(ValueError):
    """The Euler step overshoots: some self-transition probability < -tolerance."""


@dataclass(frozen=True)
class RateConfig:
    omega: float = 0.0
    eta: float = 0.0
    db_design: str = "general"
    exact_expectation: bool = False

    def __post_init__(self):
        for name in ("omega", "eta"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v}")
        if self.db_design not in DB_DESIGNS:
            raise ValueError(f"unknown db_design {self.db_design!r}; choose from {DB_DESIGNS}")


def interp_prob(z1: int, p0: np.ndarray, t: float) -> np.ndarray:
    """``p_{t|1}(. | z1) = t * delta(., z1) + (1 - t) * p0``."""
    p = (1.0 - t) * np.asarray(p0, dtype=np.float64)
    p[z1] += t
    return p


def interp_deriv(z1: int, p0: np.ndarray) -> np.ndarray:
    """Time derivative of :func:`interp_prob`: ``delta(., z1) - p0``."""
    d = -np.asarray(p0, dtype=np.float64)
    d[z1] += 1.0
    return d


def alive_states(z1: int, p0: np.ndarray, t: float) -> np.ndarray:
    """States with positive conditional mass; ``z1`` counts as alive even at t = 0."""
    alive = interp_prob(z1, p0, t) > ALIVE_EPS
    alive[z1] = True
    return alive


def _balance(row: np.ndarray, z_t: int) -> np.ndarray:
    row[z_t] = 0.0
    row[z_t] = -row.sum()
    return row


def rstar_row(z_t: int, z1: int, p0: np.ndarray, t: float) -> np.ndarray:
    p = interp_prob(z1, p0, t)
    d = interp_deriv(z1, p0)
    alive = alive_states(z1, p0, t)
    row = np.zeros_like(p)
    if p[z_t] > ALIVE_EPS:
        row = np.maximum(d - d[z_t], 0.0) / (alive.sum() * p[z_t])
        row[~alive] = 0.0
    return _balance(row, z_t)


def guidance_row(z_t: int, z1: int, p0: np.ndarray, t: float, omega: float) -> np.ndarray:
    p = interp_prob(z1, p0, t)
    row = np.zeros_like(p)
    if z_t != z1 and p[z_t] > ALIVE_EPS:
        row[z1] = omega / (alive_states(z1, p0, t).sum() * p[z_t])
    return _balance(row, z_t)


def db_anchor(p0: np.ndarray) -> int:
    """Highest-mass source state (lowest index on ties)."""
    return int(np.argmax(p0))


def db_row(z_t: int, z1: int, p0: np.ndarray, t: float, design: str = "general",
           anchor: int | None = None) -> np.ndarray:
    """Detailed-balance rate row: off-diagonal entry ``j`` is ``p_{t|1}(j|z1)`` on the design's pattern.

    ``general`` keeps every pair, the ``column_*`` designs keep the pairs touching
    one hub state, ``entry_max_marginal`` keeps only the pair ``{anchor, z1}``.
    """
    if design not in DB_DESIGNS:
        raise ValueError(f"unknown db_design {design!r}")
    p = interp_prob(z1, p0, t)
    anchor = db_anchor(p0) if anchor is None else anchor
    row = np.zeros_like(p)
    if p[z_t] <= ALIVE_EPS:
        return row
    keep = np.zeros(p.size, dtype=bool)
    if design == "general":
        keep[:] = True
    elif design == "entry_max_marginal":
        if anchor != z1:
            if z_t == anchor:
                keep[z1] = True
            elif z_t == z1:
                keep[anchor] = True
    else:
        hub = {"column_max_marginal": anchor, "column_x1": z1,
               "column_argmax_pt": int(np.argmax(p))}[design]
        if z_t == hub:
            keep[:] = True
        else:
            keep[hub] = True
    row[keep] = p[keep]
    return _balance(row, z_t)


def combined_row(z_t: int, z1: int, p0: np.ndarray, t: float, cfg: RateConfig,
                 anchor: int | None = None) -> np.ndarray:
    row = rstar_row(z_t, z1, p0, t)
    if cfg.eta:
        row = row + cfg.eta * db_row(z_t, z1, p0, t, cfg.db_design, anchor)
    if cfg.omega:
        row = row + guidance_row(z_t, z1, p0, t, cfg.omega)
    return _balance(row, z_t)


RateFn = Callable[[int, int, np.ndarray, float], np.ndarray]


def kolmogorov_residual(rate_fn: RateFn, z1: int, p0: np.ndarray, t: float) -> np.ndarray:
    """Inflow minus outflow minus ``d/dt p_{t|1}`` for every state; zero iff the rates generate the path."""
    p = interp_prob(z1, p0, t)
    R = np.stack([rate_fn(z, z1, p0, t) for z in range(p.size)])
    off = R - np.diag(np.diag(R))
    inflow = off.T @ p
    outflow = off.sum(axis=1) * p
    return inflow - outflow - interp_deriv(z1, p0)


def detailed_balance_gap(z1: int, p0: np.ndarray, t: float, design: str, anchor: int | None = None) -> np.ndarray:
    """``p(a) R(a, b) - p(b) R(b, a)`` for all pairs."""
    p = interp_prob(z1, p0, t)
    R = np.stack([db_row(z, z1, p0, t, design, anchor) for z in range(p.size)])
    flow = p[:, None] * R
    return flow - flow.T


# ---------------------------------------------------------------------------
# multivariate Euler step


def block_tables(init: InitialDistribution, t: float, cfg: RateConfig):
    """Rate tables ``T[z1, z_t, :]`` for the node block and the edge block."""
    out = []
    for p0, card in ((init.node_p0, init.x_card), (init.edge_p0, init.e_card)):
        out.append(kernels.rate_table(p0, t, cfg.omega, cfg.eta, cfg.db_design, db_anchor(p0), card))
    return out


def _block_probs(states, post, table, dt, cfg, rng, tol):
    if not cfg.exact_expectation:
        z1 = kernels.categorical(post, rng.random(post.shape[0]))
        post = np.zeros_like(post)
        post[np.arange(z1.size), z1] = 1.0
    probs = kernels.expected_rates(states, post, table) * dt
    probs[np.arange(states.size), states] += 1.0
    if states.size and probs[np.arange(states.size), states].min() < -tol:
        raise StepTooLargeError(f"dt={dt:g} drives a self-transition probability below {-tol}")
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum(axis=1, keepdims=True)


def is_final_step(t: float, dt: float) -> bool:
    return t + dt >= 1.0 - 1e-12


def euler_step(g_t: CategoricalGraph, posterior, t: float, dt: float, cfg: RateConfig,
               init: InitialDistribution, rng: np.random.Generator, tol: float = 0.1) -> CategoricalGraph:
    """One independent-dimension Euler step ``t -> t + dt``.

    ``posterior`` is a :class:`~graphdfm.denoiser.ProbGraph` over the clean
    states. When the step reaches t = 1 the new states are drawn from the
    posterior directly.
    """
    if t + dt > 1.0 + 1e-12:
        raise ValueError("t + dt exceeds 1")
    if posterior.node_probs.shape[0] != g_t.n_nodes or posterior.edge_probs.shape[0] != g_t.edge_states.size:
        raise ValueError("posterior dimensions do not match the graph")
    if is_final_step(t, dt):
        nodes = kernels.categorical(posterior.node_probs, rng.random(g_t.n_nodes))
        edges = kernels.categorical(posterior.edge_probs, rng.random(g_t.edge_states.size))
        return CategoricalGraph(g_t.n_nodes, nodes, edges, init.x_card, init.e_card)
    node_tab, edge_tab = block_tables(init, t, cfg)
    node_p = _block_probs(g_t.node_states, posterior.node_probs, node_tab, dt, cfg, rng, tol)
    edge_p = _block_probs(g_t.edge_states, posterior.edge_probs, edge_tab, dt, cfg, rng, tol)
    nodes = kernels.categorical(node_p, rng.random(g_t.n_nodes))
    edges = kernels.categorical(edge_p, rng.random(g_t.edge_states.size))
    return CategoricalGraph(g_t.n_nodes, nodes, edges, g_t.x_card, g_t.e_card)


def dimension_kernels(states: np.ndarray, post: np.ndarray, table: np.ndarray, dt: float,
                      cfg: RateConfig) -> np.ndarray:
    """Exact per-dimension transition distributions of one Euler step (no sampling).

    With ``exact_expectation`` the clamp is applied to the expected row; otherwise
    the clamped row of each ``z1`` is averaged under the posterior, which is the
    law of the sampled-``z1`` variant.
    """
    idx = np.arange(states.size)

    def clamp(p):
        p = np.clip(p, 0.0, None)
        return p / p.sum(axis=1, keepdims=True)

    if cfg.exact_expectation:
        probs = kernels.expected_rates(states, post, table) * dt
        probs[idx, states] += 1.0
        return clamp(probs)
    out = np.zeros((states.size, table.shape[2]))
    for z1 in range(post.shape[1]):
        rows = table[z1, states, :] * dt
        rows[idx, states] += 1.0
        out += post[:, [z1]] * clamp(rows)
    return out
