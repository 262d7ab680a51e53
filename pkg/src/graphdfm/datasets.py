"""Synthetic graph families for desk-scale runs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .graph import CategoricalGraph, GraphDataset

FAMILIES = ("tree", "planar", "sbm-like", "toy-enumerable")
JITTER = 1e-9


@dataclass(frozen=True)
class SynthSpec:
    family: str = "tree"
    n_graphs: int = 64
    n_min: int = 6
    n_max: int = 6
    seed: int = 0
    labels: bool = False          # density-above-median binary label

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.n_min > self.n_max:
            raise ValueError("n_min must not exceed n_max")
        if self.n_min < 1:
            raise ValueError("graphs need at least one node")
        if self.family == "planar" and self.n_min < 3:
            raise ValueError("planar family needs n_min >= 3")
        if self.n_graphs < 0:
            raise ValueError("n_graphs must be non-negative")


def random_tree(n: int, rng: np.random.Generator) -> CategoricalGraph:
    """Recursive attachment: node ``k`` links to a uniform earlier node."""
    edges = [(int(rng.integers(k)), k, 1) for k in range(1, n)]
    return CategoricalGraph.from_edges([0] * n, edges, 1, 2)


def random_planar(n: int, rng: np.random.Generator) -> CategoricalGraph:
    """Delaunay triangulation of ``n`` uniform points in the unit square."""
    pts = rng.random((n, 2))
    if n == 3:
        return CategoricalGraph.from_edges([0] * 3, [(0, 1, 1), (0, 2, 1), (1, 2, 1)], 1, 2)
    try:
        tri = Delaunay(pts)
    except Exception:  # collinear draw; nudge deterministically and retry
        pts = pts + JITTER * np.arange(2 * n).reshape(n, 2) ** 2
        tri = Delaunay(pts)
    edges = set()
    for a, b, c in tri.simplices:
        for u, v in ((a, b), (b, c), (a, c)):
            edges.add((min(u, v), max(u, v)))
    return CategoricalGraph.from_edges([0] * n, [(u, v, 1) for u, v in sorted(edges)], 1, 2)


def random_sbm(n: int, rng: np.random.Generator, p_in: float = 0.8, p_out: float = 0.1) -> CategoricalGraph:
    block = np.arange(n) >= n // 2
    iu, ju = np.triu_indices(n, 1)
    p = np.where(block[iu] == block[ju], p_in, p_out)
    return CategoricalGraph(n, np.zeros(n, dtype=np.int64), (rng.random(iu.size) < p).astype(np.int64), 1, 2)


def toy_fixture() -> GraphDataset:
    """Two 2-node graphs: both nodes 0 joined by edge 1, and both nodes 1 unjoined."""
    graphs = [CategoricalGraph(2, [0, 0], [1], 2, 2), CategoricalGraph(2, [1, 1], [0], 2, 2)]
    return GraphDataset(graphs, 2, 2, meta={"family": "toy-enumerable"})


def density(g: CategoricalGraph) -> float:
    m = g.edge_states.size
    return float((g.edge_states != 0).sum()) / m if m else 0.0


def density_labels(graphs) -> list[int]:
    d = np.array([density(g) for g in graphs])
    return [int(v) for v in d > np.median(d)] if d.size else []


_BUILDERS = {"tree": random_tree, "planar": random_planar, "sbm-like": random_sbm}


def generate(spec: SynthSpec, rng: np.random.Generator | None = None) -> GraphDataset:
    if spec.family == "toy-enumerable":
        ds = toy_fixture()
        labels = density_labels(ds.graphs) if spec.labels else None
        return GraphDataset(ds.graphs, 2, 2, labels=labels, meta={"family": spec.family})
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    build = _BUILDERS[spec.family]
    graphs = [build(int(rng.integers(spec.n_min, spec.n_max + 1)), rng) for _ in range(spec.n_graphs)]
    labels = density_labels(graphs) if spec.labels else None
    meta = {"family": spec.family, "seed": spec.seed, "n_min": spec.n_min, "n_max": spec.n_max}
    return GraphDataset(graphs, 1, 2, labels=labels, meta=meta)
