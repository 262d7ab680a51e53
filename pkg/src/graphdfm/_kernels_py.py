"""NumPy implementation of the sampling kernels (fallback for the compiled core)."""
from __future__ import annotations

import numpy as np

DB_DESIGNS = ("general", "column_max_marginal", "column_x1", "column_argmax_pt", "entry_max_marginal")
ALIVE_EPS = 1e-15


def _db_pattern(design: str, z1: int, anchor: int, p: np.ndarray) -> np.ndarray:
    Z = p.size
    if design == "general":
        return ~np.eye(Z, dtype=bool)
    mask = np.zeros((Z, Z), dtype=bool)
    if design == "entry_max_marginal":
        if anchor != z1:
            mask[anchor, z1] = mask[z1, anchor] = True
        return mask
    hub = {"column_max_marginal": anchor, "column_x1": z1, "column_argmax_pt": int(np.argmax(p))}[design]
    mask[hub, :] = True
    mask[:, hub] = True
    mask[hub, hub] = False
    return mask


def rate_table(p0, t, omega, eta, design, anchor, zc):
    """Combined rate rows for every clean target ``z1 < zc`` and current state.

    Returns ``T`` with shape ``(zc, Z, Z)``; ``T[z1, z]`` is a generator row
    (non-negative off-diagonal, zero row sum).
    """
    p0 = np.asarray(p0, dtype=np.float64)
    Z = p0.size
    table = np.zeros((zc, Z, Z))
    for z1 in range(zc):
        p = (1.0 - t) * p0
        p[z1] += t
        d = -p0.copy()
        d[z1] += 1.0
        alive = p > ALIVE_EPS
        alive[z1] = True
        live_rows = p > ALIVE_EPS
        denom = np.where(live_rows, alive.sum() * p, 1.0)
        R = np.maximum(d[None, :] - d[:, None], 0.0) / denom[:, None]
        R[:, ~alive] = 0.0
        if omega:
            R[:, z1] += omega / denom
            R[z1, z1] = 0.0
        if eta:
            R += eta * np.where(_db_pattern(design, z1, anchor, p), p[None, :], 0.0)
        R[~live_rows, :] = 0.0
        np.fill_diagonal(R, 0.0)
        R[np.arange(Z), np.arange(Z)] = -R.sum(axis=1)
        table[z1] = R
    return table


def expected_rates(states, post, table):
    """``out[d] = sum_z1 post[d, z1] * table[z1, states[d]]``."""
    states = np.asarray(states, dtype=np.int64)
    rows = table[:, states, :]  # (zc, D, Z)
    return np.einsum("dk,kdj->dj", post, rows)


def categorical(probs, u):
    """Inverse-CDF draw per row; ``u`` holds one uniform in [0, 1) per row."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    cdf = np.cumsum(probs, axis=1)
    thresh = np.asarray(u)[:, None] * cdf[:, -1:]
    return (cdf <= thresh).sum(axis=1).astype(np.int64)
