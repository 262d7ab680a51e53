"""Factorised initial (source) distributions over node and edge states."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CategoricalGraph, GraphDataset, n_pairs

KINDS = ("uniform", "masking", "marginal", "absorbing")


@dataclass(frozen=True, eq=False)
class InitialDistribution:
    """Shared per-node and per-edge source simplexes.

    For ``masking`` both vectors carry one extra trailing state (the mask);
    ``x_card``/``e_card`` always refer to the clean data cardinalities.
    """

    kind: str
    node_p0: np.ndarray
    edge_p0: np.ndarray
    x_card: int
    e_card: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown initial distribution {self.kind!r}")
        extra = 1 if self.kind == "masking" else 0
        for name, vec, card in (("node_p0", self.node_p0, self.x_card), ("edge_p0", self.edge_p0, self.e_card)):
            vec = np.asarray(vec, dtype=np.float64)
            vec.setflags(write=False)
            object.__setattr__(self, name, vec)
            if vec.shape != (card + extra,):
                raise ValueError(f"{name} has length {vec.size}, expected {card + extra}")
            if vec.min() < 0 or abs(vec.sum() - 1.0) > 1e-12:
                raise ValueError(f"{name} is not a probability vector")

    @property
    def masking(self) -> bool:
        return self.kind == "masking"

    @property
    def node_states(self) -> int:
        """Node cardinality of noisy graphs (includes the mask state)."""
        return self.node_p0.size

    @property
    def edge_states(self) -> int:
        return self.edge_p0.size

    @property
    def node_mask(self) -> int | None:
        return self.x_card if self.masking else None

    @property
    def edge_mask(self) -> int | None:
        return self.e_card if self.masking else None

    def dim_p0(self, n_nodes: int) -> list[np.ndarray]:
        """The source simplex for every dimension of an ``n_nodes`` graph, nodes first."""
        return [self.node_p0] * n_nodes + [self.edge_p0] * n_pairs(n_nodes)


def dataset_marginals(dataset: GraphDataset) -> tuple[np.ndarray, np.ndarray]:
    node_counts = np.zeros(dataset.x_card)
    edge_counts = np.zeros(dataset.e_card)
    for g in dataset.graphs:
        node_counts += np.bincount(g.node_states, minlength=dataset.x_card)
        edge_counts += np.bincount(g.edge_states, minlength=dataset.e_card)
    if node_counts.sum() == 0:
        raise ValueError("dataset has no nodes")
    if edge_counts.sum() == 0:
        # only single-node graphs: no edge slot was ever observed
        edge_counts[0] = 1.0
    return node_counts / node_counts.sum(), edge_counts / edge_counts.sum()


def build_initial(kind: str, dataset: GraphDataset | None = None, x_card: int | None = None,
                  e_card: int | None = None) -> InitialDistribution:
    """Construct one of the four source distributions.

    ``marginal`` and ``absorbing`` are estimated from ``dataset`` (raw counts,
    ties in the mode broken toward the lower index). ``uniform`` and
    ``masking`` need only the cardinalities, taken from ``dataset`` when given.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown initial distribution {kind!r}; choose from {KINDS}")
    if dataset is not None:
        x_card, e_card = dataset.x_card, dataset.e_card
    if x_card is None or e_card is None:
        raise ValueError("cardinalities are required when no dataset is given")
    if kind == "uniform":
        return InitialDistribution(kind, np.full(x_card, 1.0 / x_card), np.full(e_card, 1.0 / e_card), x_card, e_card)
    if kind == "masking":
        node, edge = np.zeros(x_card + 1), np.zeros(e_card + 1)
        node[-1] = edge[-1] = 1.0
        return InitialDistribution(kind, node, edge, x_card, e_card)
    if dataset is None or len(dataset) == 0:
        raise ValueError(f"{kind} initial distribution needs a non-empty dataset")
    node_m, edge_m = dataset_marginals(dataset)
    if kind == "marginal":
        return InitialDistribution(kind, node_m, edge_m, x_card, e_card)
    node, edge = np.zeros(x_card), np.zeros(e_card)
    node[int(np.argmax(node_m))] = 1.0
    edge[int(np.argmax(edge_m))] = 1.0
    return InitialDistribution(kind, node, edge, x_card, e_card)


def sample_initial(dist: InitialDistribution, n_nodes: int, rng: np.random.Generator) -> CategoricalGraph:
    """Draw every node and edge state independently from the source simplexes."""
    if n_nodes < 1:
        raise ValueError("n_nodes must be at least 1")
    nodes = rng.choice(dist.node_states, size=n_nodes, p=dist.node_p0)
    edges = rng.choice(dist.edge_states, size=n_pairs(n_nodes), p=dist.edge_p0)
    return CategoricalGraph(n_nodes, nodes, edges, dist.node_states, dist.edge_states)


def initial_to_json(dist: InitialDistribution) -> dict:
    return {"kind": dist.kind, "node_p0": dist.node_p0.tolist(), "edge_p0": dist.edge_p0.tolist(),
            "x_card": dist.x_card, "e_card": dist.e_card}


def initial_from_json(doc: dict) -> InitialDistribution:
    return InitialDistribution(doc["kind"], np.array(doc["node_p0"]), np.array(doc["edge_p0"]),
                               int(doc["x_card"]), int(doc["e_card"]))
