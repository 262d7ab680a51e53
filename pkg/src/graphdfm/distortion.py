"""Monotone time distortions of [0, 1], their induced densities and step schedules."""
from __future__ import annotations

import math

import numpy as np

KINDS = ("polyinc", "cos", "identity", "revcos", "polydec")


def _check_kind(kind: str):
    if kind not in KINDS:
        raise ValueError(f"unknown distortion {kind!r}; choose from {KINDS}")


def _forward(kind: str, t):
    if kind == "identity":
        return t
    if kind == "polyinc":
        return t * t
    if kind == "polydec":
        return 2 * t - t * t
    if kind == "cos":
        return (1 - np.cos(np.pi * t)) / 2
    return 2 * t - (1 - np.cos(np.pi * t)) / 2


def distort(kind: str, t):
    """Map uniform time ``t`` to distorted time ``f(t)``; accepts scalars or arrays."""
    _check_kind(kind)
    arr = np.asarray(t, dtype=np.float64)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("t must lie in [0, 1]")
    out = _forward(kind, arr)
    return float(out) if out.ndim == 0 else out


def _revcos_inverse(y: float, tol: float = 1e-12) -> float:
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _forward("revcos", mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def inverse(kind: str, y: float) -> float:
    """``f^{-1}(y)``; doubles as the CDF of the distorted time."""
    _check_kind(kind)
    if not 0.0 <= y <= 1.0:
        raise ValueError("y must lie in [0, 1]")
    if kind == "identity":
        return y
    if kind == "polyinc":
        return math.sqrt(y)
    if kind == "polydec":
        return 1.0 - math.sqrt(1.0 - y)
    if kind == "cos":
        return math.acos(1.0 - 2.0 * y) / math.pi
    return _revcos_inverse(y)


def distortion_pdf(kind: str, t_prime: float) -> float:
    """Density of ``f(U)`` for ``U ~ U[0, 1]``; ``math.inf`` where it diverges."""
    _check_kind(kind)
    if not 0.0 <= t_prime <= 1.0:
        raise ValueError("t_prime must lie in [0, 1]")
    y = t_prime
    if kind == "identity":
        return 1.0
    if kind == "polyinc":
        return math.inf if y == 0 else 0.5 / math.sqrt(y)
    if kind == "polydec":
        return math.inf if y == 1 else 0.5 / math.sqrt(1.0 - y)
    if kind == "cos":
        if y in (0.0, 1.0):
            return math.inf
        return 1.0 / (math.pi * math.sqrt(y * (1.0 - y)))
    t = _revcos_inverse(y)
    return 1.0 / (2.0 - 0.5 * math.pi * math.sin(math.pi * t))


def step_schedule(kind: str, n_steps: int) -> list[tuple[float, float]]:
    """Distorted Euler grid: ``t_k = f(k/n)``, ``dt_k = f((k+1)/n) - t_k``.

    The last step always lands exactly on 1.
    """
    _check_kind(kind)
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    grid = [float(_forward(kind, k / n_steps)) for k in range(n_steps)] + [1.0]
    grid[0] = 0.0
    return [(grid[k], grid[k + 1] - grid[k]) for k in range(n_steps)]


def sample_times(kind: str, size: int, rng: np.random.Generator) -> np.ndarray:
    """Training-time draws ``t' = f(t)``, ``t ~ U[0, 1]``."""
    _check_kind(kind)
    return np.asarray(_forward(kind, rng.random(size)), dtype=np.float64)
