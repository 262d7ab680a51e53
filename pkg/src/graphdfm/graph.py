"""Categorical graph data model, permutations, isomorphism and dataset I/O.

Graphs are stored as a vector of node states and a vector of edge states over
the strictly upper-triangular pairs ``(i, j), i < j`` in row-major order
(``numpy.triu_indices(n, k=1)``). Edge state 0 means "no edge".
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

ISO_NODE_CAP = 12


class GraphTooLargeError(ValueError):
    """Raised when an exhaustive routine is asked to handle too many nodes."""


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column indices of the upper-triangular slots, in storage order."""
    return np.triu_indices(n, k=1)


def _frozen(a: Iterable[int]) -> np.ndarray:
    arr = np.array(list(a) if not isinstance(a, np.ndarray) else a, dtype=np.int64).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CategoricalGraph:
    n_nodes: int
    node_states: np.ndarray
    edge_states: np.ndarray
    x_card: int
    e_card: int

    def __post_init__(self):
        object.__setattr__(self, "node_states", _frozen(self.node_states))
        object.__setattr__(self, "edge_states", _frozen(self.edge_states))
        n = self.n_nodes
        if n < 0:
            raise ValueError("n_nodes must be non-negative")
        if self.node_states.shape != (n,):
            raise ValueError(f"expected {n} node states, got {self.node_states.shape[0]}")
        if self.edge_states.shape != (n_pairs(n),):
            raise ValueError(f"expected {n_pairs(n)} edge states, got {self.edge_states.shape[0]}")
        if n and (self.node_states.min() < 0 or self.node_states.max() >= self.x_card):
            raise ValueError("node state out of range")
        if self.edge_states.size and (self.edge_states.min() < 0 or self.edge_states.max() >= self.e_card):
            raise ValueError("edge state out of range")

    @property
    def n_dims(self) -> int:
        return self.n_nodes + n_pairs(self.n_nodes)

    @classmethod
    def from_edges(cls, nodes: Sequence[int], edges: Iterable[Sequence[int]], x_card: int, e_card: int):
        """Build from node states and ``(i, j[, state])`` triples; missing pairs get state 0."""
        n = len(nodes)
        adj = np.zeros((n, n), dtype=np.int64)
        for edge in edges:
            i, j = int(edge[0]), int(edge[1])
            s = int(edge[2]) if len(edge) > 2 else 1
            if i == j:
                raise ValueError("self-loops are not representable")
            adj[i, j] = adj[j, i] = s
        return cls.from_adjacency(nodes, adj, x_card, e_card)

    @classmethod
    def from_adjacency(cls, nodes: Sequence[int], adj: np.ndarray, x_card: int, e_card: int):
        n = len(nodes)
        iu = pair_index(n)
        return cls(n, np.asarray(nodes), np.asarray(adj)[iu], x_card, e_card)

    def adjacency(self) -> np.ndarray:
        """Symmetric ``N x N`` matrix of edge states (zero diagonal)."""
        n = self.n_nodes
        adj = np.zeros((n, n), dtype=np.int64)
        iu = pair_index(n)
        adj[iu] = self.edge_states
        adj[iu[1], iu[0]] = self.edge_states
        return adj

    def skeleton(self, absent: Sequence[int] = (0,)) -> np.ndarray:
        """Binary adjacency where an edge exists iff its state is not in ``absent``."""
        adj = self.adjacency()
        mask = ~np.isin(adj, list(absent))
        np.fill_diagonal(mask, False)
        return mask.astype(np.float64)

    def edge_list(self) -> list[tuple[int, int, int]]:
        iu = pair_index(self.n_nodes)
        return [(int(i), int(j), int(s)) for i, j, s in zip(iu[0], iu[1], self.edge_states) if s != 0]

    def with_cards(self, x_card: int, e_card: int) -> "CategoricalGraph":
        return CategoricalGraph(self.n_nodes, self.node_states, self.edge_states, x_card, e_card)

    def states(self) -> np.ndarray:
        """All D dimension states, nodes first then edges."""
        return np.concatenate([self.node_states, self.edge_states])

    def key(self) -> tuple:
        return (self.n_nodes, self.x_card, self.e_card, self.node_states.tobytes(), self.edge_states.tobytes())

    def __eq__(self, other):
        if not isinstance(other, CategoricalGraph):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return (f"CategoricalGraph(n={self.n_nodes}, nodes={self.node_states.tolist()}, "
                f"edges={self.edge_list()}, X={self.x_card}, E={self.e_card})")


def check_permutation(sigma: Sequence[int], n: int) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.int64)
    if sigma.shape != (n,) or not np.array_equal(np.sort(sigma), np.arange(n)):
        raise ValueError(f"not a permutation of range({n}): {sigma.tolist()}")
    return sigma


def inverse_permutation(sigma: Sequence[int]) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.int64)
    inv = np.empty_like(sigma)
    inv[sigma] = np.arange(sigma.size)
    return inv


def permute(g: CategoricalGraph, sigma: Sequence[int]) -> CategoricalGraph:
    """Relabel nodes so that node ``sigma[i]`` of the result is node ``i`` of ``g``."""
    sigma = check_permutation(sigma, g.n_nodes)
    inv = inverse_permutation(sigma)
    adj = g.adjacency()[np.ix_(inv, inv)]
    return CategoricalGraph.from_adjacency(g.node_states[inv], adj, g.x_card, g.e_card)


def permute_pairs(sigma: Sequence[int], values: np.ndarray) -> np.ndarray:
    """Apply a node permutation to per-pair rows (shape ``(N(N-1)/2, ...)``)."""
    sigma = np.asarray(sigma)
    n = sigma.size
    inv = inverse_permutation(sigma)
    iu = pair_index(n)
    lookup = np.full((n, n), -1, dtype=np.int64)
    lookup[iu] = np.arange(iu[0].size)
    lookup[iu[1], iu[0]] = np.arange(iu[0].size)
    return values[lookup[inv[iu[0]], inv[iu[1]]]]


# ---------------------------------------------------------------------------
# isomorphism


def _refined_colors(graphs: Sequence[CategoricalGraph]) -> list[list]:
    """Colour refinement run jointly so colours are comparable across graphs."""
    adjs = [g.adjacency() for g in graphs]
    colors = [[(int(s),) for s in g.node_states] for g in graphs]
    for _ in range(max(g.n_nodes for g in graphs) + 1):
        new = []
        for g, adj, col in zip(graphs, adjs, colors):
            sig = []
            for v in range(g.n_nodes):
                nb = sorted((int(adj[v, u]), col[u]) for u in range(g.n_nodes) if u != v and adj[v, u] != 0)
                sig.append((col[v], tuple(nb)))
            new.append(sig)
        # compress to small canonical ids shared across graphs
        palette = {c: k for k, c in enumerate(sorted({c for sig in new for c in sig}))}
        new = [[(palette[c],) for c in sig] for sig in new]
        stable = all(len(set(a)) == len(set(b)) for a, b in zip(new, colors))
        colors = new
        if stable:
            break
    return colors


def _check_cap(n: int, cap: int):
    if n > cap:
        raise GraphTooLargeError(f"graph with {n} nodes exceeds isomorphism cap of {cap}")


def are_isomorphic(g1: CategoricalGraph, g2: CategoricalGraph, cap: int = ISO_NODE_CAP) -> bool:
    """Exact labelled-graph isomorphism by refined backtracking search."""
    if (g1.x_card, g1.e_card) != (g2.x_card, g2.e_card):
        raise ValueError("graphs have different state cardinalities")
    _check_cap(g1.n_nodes, cap)
    _check_cap(g2.n_nodes, cap)
    if g1.n_nodes != g2.n_nodes:
        return False
    if g1.n_nodes == 0:
        return True
    if sorted(g1.node_states.tolist()) != sorted(g2.node_states.tolist()):
        return False
    if sorted(g1.edge_states.tolist()) != sorted(g2.edge_states.tolist()):
        return False
    c1, c2 = _refined_colors([g1, g2])
    if sorted(c1) != sorted(c2):
        return False
    a1, a2 = g1.adjacency(), g2.adjacency()
    n = g1.n_nodes
    # smallest colour classes first keeps the branching factor low
    class_size = {c: c1.count(c) for c in set(c1)}
    order = sorted(range(n), key=lambda v: (class_size[c1[v]], v))
    mapping = [-1] * n
    used = [False] * n

    def extend(k: int) -> bool:
        if k == n:
            return True
        v = order[k]
        for w in range(n):
            if used[w] or c2[w] != c1[v]:
                continue
            if all(a1[v, order[i]] == a2[w, mapping[order[i]]] for i in range(k)):
                mapping[v] = w
                used[w] = True
                if extend(k + 1):
                    return True
                used[w] = False
        mapping[v] = -1
        return False

    return extend(0)


def invariant_key(g: CategoricalGraph) -> tuple:
    """Isomorphism-invariant hash key used to bucket graphs before exact checks."""
    (colors,) = _refined_colors([g])
    deg = sorted(tuple(sorted(row[row != 0].tolist())) for row in g.adjacency())
    return (g.n_nodes, tuple(sorted(g.node_states.tolist())), tuple(sorted(g.edge_states.tolist())),
            tuple(deg), len(set(colors)))


def isomorphism_classes(graphs: Sequence[CategoricalGraph], cap: int = ISO_NODE_CAP) -> list[int]:
    """Assign each graph the index of the first graph it is isomorphic to."""
    buckets: dict[tuple, list[int]] = {}
    out = []
    for idx, g in enumerate(graphs):
        _check_cap(g.n_nodes, cap)
        reps = buckets.setdefault(invariant_key(g), [])
        for r in reps:
            if are_isomorphic(graphs[r], g, cap):
                out.append(r)
                break
        else:
            reps.append(idx)
            out.append(idx)
    return out


# ---------------------------------------------------------------------------
# datasets


@dataclass
class GraphDataset:
    graphs: list[CategoricalGraph]
    x_card: int
    e_card: int
    labels: list[int] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for g in self.graphs:
            if (g.x_card, g.e_card) != (self.x_card, self.e_card):
                raise ValueError("all graphs must share x_card and e_card with the dataset")
        if self.labels is not None and len(self.labels) != len(self.graphs):
            raise ValueError("labels must align 1:1 with graphs")

    def __len__(self):
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)

    def node_counts(self) -> np.ndarray:
        return np.array([g.n_nodes for g in self.graphs], dtype=np.int64)

    def with_size(self, n: int) -> "GraphDataset":
        idx = [k for k, g in enumerate(self.graphs) if g.n_nodes == n]
        labels = [self.labels[k] for k in idx] if self.labels is not None else None
        return GraphDataset([self.graphs[k] for k in idx], self.x_card, self.e_card, labels)

    @property
    def n_labels(self) -> int:
        if not self.labels:
            return 0
        return max(lab for lab in self.labels if lab is not None) + 1

    def to_json(self) -> dict:
        recs = []
        for k, g in enumerate(self.graphs):
            recs.append({
                "n": g.n_nodes,
                "nodes": g.node_states.tolist(),
                "edges": [list(e) for e in g.edge_list()],
                "label": None if self.labels is None else self.labels[k],
            })
        return {"x_card": self.x_card, "e_card": self.e_card, "graphs": recs}

    @classmethod
    def from_json(cls, doc: dict) -> "GraphDataset":
        x_card, e_card = int(doc["x_card"]), int(doc["e_card"])
        graphs, labels = [], []
        for rec in doc["graphs"]:
            nodes = rec["nodes"]
            if len(nodes) != rec["n"]:
                raise ValueError("node list length disagrees with 'n'")
            graphs.append(CategoricalGraph.from_edges(nodes, rec.get("edges", []), x_card, e_card))
            labels.append(rec.get("label"))
        has_labels = any(lab is not None for lab in labels)
        return cls(graphs, x_card, e_card, labels if has_labels else None)

    def save(self, path: str | Path):
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "GraphDataset":
        return cls.from_json(json.loads(Path(path).read_text()))
