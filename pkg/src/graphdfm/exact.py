"""Exact law of the Euler sampler on tiny state spaces, by full enumeration."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from . import distortion
from .ctmc import block_tables, dimension_kernels, is_final_step
from .graph import CategoricalGraph, GraphDataset, n_pairs
from .initial import InitialDistribution
from .sampling import SampleConfig

MAX_STATES = 2 ** 16


class StateSpaceTooLargeError(ValueError):
    pass


@dataclass
class ExactResult:
    n_nodes: int
    cards: tuple[int, ...]          # per-dimension cardinalities of ``probs`` axes
    probs: np.ndarray               # joint law, shape ``cards``
    tv: float | None = None
    step_mass: list[float] = field(default_factory=list)

    def graphs(self, x_card: int, e_card: int):
        """Yield ``(graph, probability)`` over the whole space."""
        n = self.n_nodes
        for idx in itertools.product(*(range(c) for c in self.cards)):
            yield CategoricalGraph(n, idx[:n], idx[n:], x_card, e_card), float(self.probs[idx])

    def prob_of(self, g: CategoricalGraph) -> float:
        return float(self.probs[tuple(g.states())])


def _space_size(cards) -> int:
    return int(np.prod(cards, dtype=np.int64)) if len(cards) else 1


def _outer(vectors):
    return reduce(np.multiply.outer, vectors) if vectors else np.ones(())


def data_distribution(dataset: GraphDataset, n_nodes: int) -> np.ndarray:
    cards = (dataset.x_card,) * n_nodes + (dataset.e_card,) * n_pairs(n_nodes)
    p = np.zeros(cards)
    graphs = [g for g in dataset.graphs if g.n_nodes == n_nodes]
    if not graphs:
        raise ValueError(f"no dataset graph has {n_nodes} nodes")
    for g in graphs:
        p[tuple(g.states())] += 1.0 / len(graphs)
    return p


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - q).sum())


def exact_generated_distribution(denoiser, init: InitialDistribution, n_nodes: int, cfg: SampleConfig,
                                 dataset: GraphDataset | None = None, n_steps: int | None = None) -> ExactResult:
    """Push the product source law through every scheduled Euler step exactly.

    Every reachable joint state is expanded with the per-dimension transition
    kernels conditioned on that state's posterior; the final step maps to the
    posterior itself. ``n_steps`` overrides ``cfg.n_steps`` (0 returns the
    source law). When ``dataset`` is given the TV distance to its empirical
    law over ``n_nodes``-node graphs is attached.
    """
    m = n_pairs(n_nodes)
    noisy = (init.node_states,) * n_nodes + (init.edge_states,) * m
    clean = (init.x_card,) * n_nodes + (init.e_card,) * m
    if max(_space_size(noisy), _space_size(clean)) > MAX_STATES:
        raise StateSpaceTooLargeError(f"joint state space exceeds {MAX_STATES} states")
    steps = cfg.n_steps if n_steps is None else n_steps
    probs = _outer(init.dim_p0(n_nodes))
    cards = noisy
    mass = [float(probs.sum())]
    schedule = distortion.step_schedule(cfg.sample_distortion, steps) if steps else []
    for t, dt in schedule:
        final = is_final_step(t, dt)
        new_cards = clean if final else noisy
        new = np.zeros(new_cards)
        if not final:
            node_tab, edge_tab = block_tables(init, t, cfg.rate)
        for idx in zip(*np.nonzero(probs)):
            weight = probs[idx]
            g = CategoricalGraph(n_nodes, idx[:n_nodes], idx[n_nodes:], init.node_states, init.edge_states)
            post = denoiser.predict(g, t, cfg.label)
            if final:
                per_dim = list(post.node_probs) + list(post.edge_probs)
            else:
                kn = dimension_kernels(g.node_states, post.node_probs, node_tab, dt, cfg.rate)
                ke = dimension_kernels(g.edge_states, post.edge_probs, edge_tab, dt, cfg.rate)
                per_dim = list(kn) + list(ke)
            new += weight * _outer(per_dim)
        probs, cards = new, new_cards
        mass.append(float(probs.sum()))
    result = ExactResult(n_nodes, tuple(cards), probs, step_mass=mass)
    if dataset is not None:
        target = data_distribution(dataset, n_nodes)
        if cards != clean:
            # law still over the noisy space: embed the data law into it
            padded = np.zeros(cards)
            padded[tuple(slice(0, c) for c in clean)] = target
            target = padded
        result.tv = total_variation(probs, target)
    return result
