"""Generation: source draw followed by distorted-schedule Euler denoising."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import distortion
from .ctmc import RateConfig, StepTooLargeError, euler_step, is_final_step
from .denoiser import ProbGraph
from .graph import CategoricalGraph
from .initial import InitialDistribution, sample_initial

MAX_SPLITS = 12


@dataclass
class SampleConfig:
    n_steps: int = 100
    sample_distortion: str = "identity"
    rate: RateConfig = field(default_factory=RateConfig)
    gamma: float = 1.0
    label: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.sample_distortion not in distortion.KINDS:
            raise ValueError(f"unknown sample_distortion {self.sample_distortion!r}")


def guided_posterior(cond: ProbGraph, uncond: ProbGraph, gamma: float) -> ProbGraph:
    """Per-dimension geometric mix ``cond^gamma * uncond^(1-gamma)``, renormalised."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    out = []
    for c, u in ((cond.node_probs, uncond.node_probs), (cond.edge_probs, uncond.edge_probs)):
        if c.shape != u.shape:
            raise ValueError("conditional and unconditional shapes differ")
        if gamma == 1.0:
            out.append(c.copy())
            continue
        if gamma == 0.0:
            out.append(u.copy())
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            logc, logu = np.log(c), np.log(u)
            # a zero in either factor stays zero
            logw = np.where((c > 0) & (u > 0), gamma * logc + (1.0 - gamma) * logu, -np.inf)
        if c.size and np.any(np.all(np.isneginf(logw), axis=1)):
            raise ValueError("conditional and unconditional posteriors share no support in some dimension")
        w = np.exp(logw - logw.max(axis=1, keepdims=True)) if c.size else logw
        out.append(w / w.sum(axis=1, keepdims=True) if c.size else w)
    return ProbGraph(*out)


class GuidedDenoiser:
    """Classifier-free guidance on top of a label-aware denoiser."""

    def __init__(self, denoiser, label: int, gamma: float):
        self.inner, self.label, self.gamma = denoiser, label, gamma
        self.x_card, self.e_card = denoiser.x_card, denoiser.e_card

    def predict(self, g_t: CategoricalGraph, t: float, label=None) -> ProbGraph:
        cond = self.inner.predict(g_t, t, self.label)
        if self.gamma == 1.0:
            return cond
        return guided_posterior(cond, self.inner.predict(g_t, t, None), self.gamma)


def node_count_histogram(counts) -> tuple[np.ndarray, np.ndarray]:
    sizes, freq = np.unique(np.asarray(counts, dtype=np.int64), return_counts=True)
    return sizes, freq / freq.sum()


def advance(g_t: CategoricalGraph, denoiser, t: float, dt: float, cfg: SampleConfig, init: InitialDistribution,
            rng: np.random.Generator, depth: int = 0) -> CategoricalGraph:
    """Euler step ``t -> t + dt``; halves the step (re-querying the denoiser) on overshoot."""
    post = denoiser.predict(g_t, t, cfg.label)
    try:
        return euler_step(g_t, post, t, dt, cfg.rate, init, rng)
    except StepTooLargeError:
        if depth >= MAX_SPLITS or is_final_step(t, dt):
            raise
    half = dt / 2.0
    g_mid = advance(g_t, denoiser, t, half, cfg, init, rng, depth + 1)
    return advance(g_mid, denoiser, t + half, dt - half, cfg, init, rng, depth + 1)


def sample_one(denoiser, init: InitialDistribution, cfg: SampleConfig, n_nodes: int,
               rng: np.random.Generator, trajectory: list | None = None) -> CategoricalGraph:
    g = sample_initial(init, n_nodes, rng)
    for t, dt in distortion.step_schedule(cfg.sample_distortion, cfg.n_steps):
        g = advance(g, denoiser, t, dt, cfg, init, rng)
        if trajectory is not None:
            trajectory.append((t + dt, g))
    return g


def graph_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for graph ``index``; parallel and serial runs coincide."""
    return np.random.default_rng([seed, index])


def sample(denoiser, init: InitialDistribution, cfg: SampleConfig, n_graphs: int, node_counts,
           start_index: int = 0) -> list[CategoricalGraph]:
    """Generate ``n_graphs`` graphs, sizes drawn from the empirical ``node_counts``."""
    sizes, probs = node_count_histogram(node_counts)
    out = []
    for i in range(start_index, start_index + n_graphs):
        rng = graph_rng(cfg.seed, i)
        n = int(rng.choice(sizes, p=probs))
        out.append(sample_one(denoiser, init, cfg, n, rng))
    return out
