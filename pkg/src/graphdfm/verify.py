"""Theory batteries: Kolmogorov validity, guidance violation, detailed balance, TV scaling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ctmc
from .ctmc import RateConfig
from .initial import KINDS


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    bound: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value:.3e} ({self.bound})"


def random_tuple(rng: np.random.Generator):
    """A random ``(z1, p0, t, kind)`` on a single categorical dimension.

    ``z1`` is a clean state; for ``masking`` the source puts all mass on an
    extra trailing state. Marginal sources sometimes contain exact zeros.
    """
    kind = KINDS[int(rng.integers(len(KINDS)))]
    card = int(rng.integers(2, 7))
    if kind == "uniform":
        p0 = np.full(card, 1.0 / card)
    elif kind == "masking":
        p0 = np.zeros(card + 1)
        p0[-1] = 1.0
    elif kind == "absorbing":
        p0 = np.zeros(card)
        p0[int(rng.integers(card))] = 1.0
    else:
        p0 = rng.dirichlet(np.ones(card))
        if rng.random() < 0.3:
            p0[int(rng.integers(card))] = 0.0
            p0 /= p0.sum()
    z1 = int(rng.integers(card))
    t = float(rng.random())
    return z1, p0, t, kind


def _rate_fn(cfg: RateConfig):
    return lambda z, z1, p0, t: ctmc.combined_row(z, z1, p0, t, cfg)


def kolmogorov_check(n: int, rng: np.random.Generator, tol: float = 1e-9) -> list[Check]:
    """Max |residual| of R* alone and of R* + eta * R^DB for every design."""
    tuples = [random_tuple(rng) for _ in range(n)]
    etas = rng.uniform(0.1, 5.0, size=n)
    out = []
    worst = max(np.abs(ctmc.kolmogorov_residual(ctmc.rstar_row, z1, p0, t)).max() for z1, p0, t, _ in tuples)
    out.append(Check("kolmogorov R*", worst < tol, float(worst), f"< {tol:g}"))
    for design in ctmc.DB_DESIGNS:
        worst = 0.0
        for (z1, p0, t, _), eta in zip(tuples, etas):
            fn = _rate_fn(RateConfig(eta=float(eta), db_design=design))
            worst = max(worst, float(np.abs(ctmc.kolmogorov_residual(fn, z1, p0, t)).max()))
        out.append(Check(f"kolmogorov R* + eta R^DB [{design}]", worst < tol, worst, f"< {tol:g}"))
    return out


def guidance_expected_residual(z1: int, p0: np.ndarray, t: float, omega: float) -> np.ndarray:
    """Closed form: ``-omega/Z`` off ``z1``, ``omega (Z-1)/Z`` at ``z1``, 0 at dead states."""
    alive = ctmc.alive_states(z1, p0, t)
    live = ctmc.interp_prob(z1, p0, t) > ctmc.ALIVE_EPS
    Z = alive.sum()
    expected = np.where(live, -omega / Z, 0.0)
    expected[z1] = omega * (Z - 1) / Z if live[z1] else 0.0
    return expected


def guidance_check(n: int, rng: np.random.Generator, omega: float = 0.1, tol: float = 1e-9) -> Check:
    worst = 0.0
    fn = _rate_fn(RateConfig(omega=omega))
    for _ in range(n):
        z1, p0, t, _ = random_tuple(rng)
        got = ctmc.kolmogorov_residual(fn, z1, p0, t)
        worst = max(worst, float(np.abs(got - guidance_expected_residual(z1, p0, t, omega)).max()))
    return Check(f"guidance residual matches -omega/Z (omega={omega:g})", worst < tol, worst, f"< {tol:g}")


def balance_check(n: int, rng: np.random.Generator, tol: float = 1e-12) -> list[Check]:
    tuples = [random_tuple(rng) for _ in range(n)]
    out = []
    for design in ctmc.DB_DESIGNS:
        worst = max(float(np.abs(ctmc.detailed_balance_gap(z1, p0, t, design)).max()) for z1, p0, t, _ in tuples)
        out.append(Check(f"detailed balance [{design}]", worst < tol, worst, f"< {tol:g}"))
    return out


def tv_sweep(steps=(16, 64, 256, 512, 1024), kind: str = "masking", omega: float = 0.0):
    """TV to the toy data law of the exact Euler sampler driven by the exact oracle."""
    from .datasets import toy_fixture
    from .denoiser import OracleDenoiser
    from .exact import exact_generated_distribution
    from .initial import build_initial
    from .sampling import SampleConfig

    ds = toy_fixture()
    init = build_initial(kind, ds)
    oracle = OracleDenoiser(ds, init)
    cfg = SampleConfig(n_steps=1, rate=RateConfig(omega=omega))
    return [(n, exact_generated_distribution(oracle, init, 2, cfg, ds, n_steps=n).tv) for n in steps]


def tv_scaling_check(sweep) -> list[Check]:
    tv = dict(sweep)
    out = [Check("TV(1024 steps)", tv[1024] < 0.05, tv[1024], "< 0.05")]
    ratio = tv[512] / tv[1024] if tv[1024] > 0 else float("inf")
    out.append(Check("TV(512)/TV(1024)", 1.5 <= ratio <= 2.5, ratio, "in [1.5, 2.5]"))
    ordered = [v for _, v in sorted(sweep)]
    out.append(Check("TV decreasing in steps", all(a > b for a, b in zip(ordered, ordered[1:])),
                     ordered[-1], "strictly decreasing"))
    return out


def run_all(n: int = 1000, seed: int = 0, omega: float = 0.1, sweep=None) -> list[Check]:
    rng = np.random.default_rng(seed)
    checks = kolmogorov_check(n, rng)
    checks.append(guidance_check(n, rng, omega))
    checks += balance_check(n, rng)
    checks += tv_scaling_check(sweep if sweep is not None else tv_sweep())
    return checks
