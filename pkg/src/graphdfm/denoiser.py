"""Posterior predictors ``p(z1 | G_t)``: exact Bayes oracle and a small trainable MLP.

The trainable model is a pair of one-hidden-layer networks (one for nodes, one
for edges) applied to permutation-equivariant per-dimension features: the
one-hot state, random-walk (RRWP) features, symmetric endpoint aggregates,
graph-level means, time and an optional label one-hot.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import CategoricalGraph, GraphDataset, pair_index, permute
from .initial import InitialDistribution

CHECKPOINT_FORMAT = "graphdfm-params"
CHECKPOINT_VERSION = 1


@dataclass
class ProbGraph:
    node_probs: np.ndarray  # (N, X)
    edge_probs: np.ndarray  # (N(N-1)/2, E)

    def __post_init__(self):
        self.node_probs = np.asarray(self.node_probs, dtype=np.float64)
        self.edge_probs = np.asarray(self.edge_probs, dtype=np.float64)

    def validate(self, atol: float = 1e-9):
        for arr in (self.node_probs, self.edge_probs):
            if arr.size and (arr.min() < 0 or np.abs(arr.sum(axis=1) - 1).max() > atol):
                raise ValueError("rows are not probability simplexes")
        return self

    def permuted(self, sigma) -> "ProbGraph":
        from .graph import inverse_permutation, permute_pairs
        inv = inverse_permutation(sigma)
        return ProbGraph(self.node_probs[inv], permute_pairs(sigma, self.edge_probs))

    def argmax_graph(self) -> CategoricalGraph:
        n = self.node_probs.shape[0]
        return CategoricalGraph(n, self.node_probs.argmax(1), self.edge_probs.argmax(1),
                                self.node_probs.shape[1], self.edge_probs.shape[1])


# ---------------------------------------------------------------------------
# RRWP


@dataclass
class RrwpFeatures:
    node_feats: np.ndarray  # (N, K)
    edge_feats: np.ndarray  # (N(N-1)/2, K)


def random_walk_powers(adj: np.ndarray, K: int) -> np.ndarray:
    """Stack ``[I, M, ..., M^{K-1}]`` for ``M = D^{-1} A``; isolated nodes give zero rows."""
    if K < 1:
        raise ValueError("K must be >= 1")
    n = adj.shape[0]
    deg = adj.sum(axis=1)
    inv = np.divide(1.0, deg, out=np.zeros_like(deg, dtype=np.float64), where=deg > 0)
    M = adj * inv[:, None]
    out = np.empty((K, n, n))
    out[0] = np.eye(n)
    for k in range(1, K):
        out[k] = out[k - 1] @ M
    return out


def rrwp(g: CategoricalGraph, K: int = 12, absent=(0,)) -> RrwpFeatures:
    """Random-walk features on the binary skeleton (edge state not in ``absent``)."""
    P = random_walk_powers(g.skeleton(absent), K)
    iu = pair_index(g.n_nodes)
    node = np.stack([np.diagonal(P[k]) for k in range(K)], axis=1) if g.n_nodes else np.zeros((0, K))
    edge = 0.5 * (P[:, iu[0], iu[1]] + P[:, iu[1], iu[0]]).T
    return RrwpFeatures(node, edge.reshape(-1, K))


# ---------------------------------------------------------------------------
# exact Bayes oracle


def _log_path_table(p0: np.ndarray, zc: int, t: float) -> np.ndarray:
    """``L[z1, z] = log p_{t|1}(z | z1)``."""
    table = (1.0 - t) * np.tile(p0, (zc, 1))
    table[np.arange(zc), np.arange(zc)] += t
    with np.errstate(divide="ignore"):
        return np.log(table)


def oracle_posterior(g_t: CategoricalGraph, t: float, dataset: GraphDataset, init: InitialDistribution,
                     weights: np.ndarray | None = None) -> ProbGraph:
    """Exact posterior marginals of the clean graph given ``g_t`` under the empirical data law.

    Only dataset graphs with ``g_t``'s node count take part. If ``g_t`` has zero
    likelihood under every atom, the t = 0 answer (per-dimension empirical
    marginals) is returned.
    """
    atoms = [k for k, g in enumerate(dataset.graphs) if g.n_nodes == g_t.n_nodes]
    if not atoms:
        raise ValueError(f"no dataset graph has {g_t.n_nodes} nodes")
    nodes = np.stack([dataset.graphs[k].node_states for k in atoms])  # (A, N)
    edges = np.stack([dataset.graphs[k].edge_states for k in atoms])  # (A, M)
    logw = np.zeros(len(atoms)) if weights is None else np.log(np.asarray(weights, dtype=np.float64)[atoms])
    Ln = _log_path_table(init.node_p0, init.x_card, t)
    Le = _log_path_table(init.edge_p0, init.e_card, t)
    loglik = logw + Ln[nodes, g_t.node_states[None, :]].sum(axis=1) + Le[edges, g_t.edge_states[None, :]].sum(axis=1)
    if np.all(np.isneginf(loglik)):
        loglik = logw
    post = np.exp(loglik - loglik.max())
    post /= post.sum()
    node_probs = np.zeros((g_t.n_nodes, init.x_card))
    edge_probs = np.zeros((edges.shape[1], init.e_card))
    for a in range(len(atoms)):
        node_probs[np.arange(g_t.n_nodes), nodes[a]] += post[a]
        edge_probs[np.arange(edges.shape[1]), edges[a]] += post[a]
    return ProbGraph(node_probs, edge_probs)


def permutation_closure(dataset: GraphDataset, max_nodes: int = 7) -> GraphDataset:
    """Every distinct relabelling of every graph, each graph's copies sharing its weight.

    Weights are stored in ``meta['weights']`` so the closure has the same law over
    isomorphism classes as the input.
    """
    graphs, labels, weights = [], [], []
    for k, g in enumerate(dataset.graphs):
        if g.n_nodes > max_nodes:
            raise ValueError(f"closure over {g.n_nodes}! permutations is too large")
        seen = {permute(g, sigma) for sigma in itertools.permutations(range(g.n_nodes))}
        for h in sorted(seen, key=lambda h: h.key()):
            graphs.append(h)
            labels.append(None if dataset.labels is None else dataset.labels[k])
            weights.append(1.0 / len(seen))
    out = GraphDataset(graphs, dataset.x_card, dataset.e_card, labels if dataset.labels is not None else None)
    out.meta["weights"] = np.array(weights)
    return out


class OracleDenoiser:
    """Zero-estimation-error posterior over a finite dataset."""

    def __init__(self, dataset: GraphDataset, init: InitialDistribution, closure: bool = False):
        self.dataset = permutation_closure(dataset) if closure else dataset
        self.weights = self.dataset.meta.get("weights")
        self.init = init
        self.x_card, self.e_card = dataset.x_card, dataset.e_card

    def predict(self, g_t: CategoricalGraph, t: float, label=None) -> ProbGraph:
        data, weights = self.dataset, self.weights
        if label is not None and data.labels is not None:
            keep = [k for k, lab in enumerate(data.labels) if lab == label]
            data = GraphDataset([data.graphs[k] for k in keep], data.x_card, data.e_card, [label] * len(keep))
            weights = None if weights is None else weights[keep]
        return oracle_posterior(g_t, t, data, self.init, weights)


# ---------------------------------------------------------------------------
# featurised MLP


@dataclass
class DenoiserParams:
    x_card: int
    e_card: int
    x_in: int
    e_in: int
    rrwp_depth: int = 12
    hidden: int = 32
    n_labels: int = 0
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    NAMES = ("Wn1", "bn1", "Wn2", "bn2", "We1", "be1", "We2", "be2")

    @property
    def label_dim(self) -> int:
        return self.n_labels + 1 if self.n_labels else 0

    @property
    def node_in_dim(self) -> int:
        K = self.rrwp_depth
        return self.x_in + K + 1 + self.e_in + self.x_in + self.e_in + 1 + self.label_dim

    @property
    def edge_in_dim(self) -> int:
        K = self.rrwp_depth
        return self.e_in + K + K + self.x_in + 1 + self.x_in + self.e_in + 1 + self.label_dim

    def shapes(self) -> dict[str, tuple[int, ...]]:
        H = self.hidden
        return {"Wn1": (self.node_in_dim, H), "bn1": (H,), "Wn2": (H, self.x_card), "bn2": (self.x_card,),
                "We1": (self.edge_in_dim, H), "be1": (H,), "We2": (H, self.e_card), "be2": (self.e_card,)}

    @classmethod
    def init(cls, x_card, e_card, x_in=None, e_in=None, rrwp_depth=12, hidden=32, n_labels=0,
             rng: np.random.Generator | None = None, scale: float = 1.0) -> "DenoiserParams":
        """Random weights (``rng`` given) or all zeros (``rng`` is None)."""
        p = cls(x_card, e_card, x_in or x_card, e_in or e_card, rrwp_depth, hidden, n_labels)
        for name, shape in p.shapes().items():
            if rng is None or name.startswith("b"):
                p.tensors[name] = np.zeros(shape)
            else:
                p.tensors[name] = rng.normal(0.0, scale / np.sqrt(shape[0]), size=shape)
        return p

    def copy(self) -> "DenoiserParams":
        return DenoiserParams(self.x_card, self.e_card, self.x_in, self.e_in, self.rrwp_depth, self.hidden,
                              self.n_labels, {k: v.copy() for k, v in self.tensors.items()})

    def flat(self) -> np.ndarray:
        return np.concatenate([self.tensors[k].ravel() for k in self.NAMES])

    def header(self) -> dict:
        return {"x_card": self.x_card, "e_card": self.e_card, "x_in": self.x_in, "e_in": self.e_in,
                "rrwp_depth": self.rrwp_depth, "hidden": self.hidden, "n_labels": self.n_labels}

    def save(self, path: str | Path, extra: dict | None = None):
        """JSON dump; ``repr`` of float64 round-trips bit-exactly."""
        doc = {"format": CHECKPOINT_FORMAT, "version": CHECKPOINT_VERSION, "header": self.header(),
               "tensors": {k: {"shape": list(self.tensors[k].shape), "data": self.tensors[k].ravel().tolist()}
                           for k in self.NAMES}}
        if extra:
            doc["extra"] = extra
        Path(path).write_text(json.dumps(doc))

    @classmethod
    def load(cls, path: str | Path) -> "DenoiserParams":
        doc = json.loads(Path(path).read_text())
        if doc.get("format") != CHECKPOINT_FORMAT or doc.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"{path} is not a version-{CHECKPOINT_VERSION} parameter checkpoint")
        p = cls(**doc["header"])
        for name, shape in p.shapes().items():
            rec = doc["tensors"][name]
            if tuple(rec["shape"]) != shape:
                raise ValueError(f"tensor {name} has shape {rec['shape']}, expected {list(shape)}")
            p.tensors[name] = np.array(rec["data"], dtype=np.float64).reshape(shape)
        return p


def _one_hot(states: np.ndarray, card: int) -> np.ndarray:
    out = np.zeros((states.size, card))
    out[np.arange(states.size), states] = 1.0
    return out


def featurize(params: DenoiserParams, g: CategoricalGraph, t: float, label: int | None = None):
    """Node and edge input matrices; every column is equivariant under node relabelling."""
    if g.x_card != params.x_in or g.e_card != params.e_in:
        raise ValueError(f"graph cardinalities ({g.x_card}, {g.e_card}) do not match the model "
                         f"inputs ({params.x_in}, {params.e_in})")
    n, K = g.n_nodes, params.rrwp_depth
    # the mask state (if any) is the extra trailing input state; it counts as no edge
    absent = (0,) if params.e_in == params.e_card else (0, params.e_card)
    feats = rrwp(g, K, absent)
    iu = pair_index(n)
    xo = _one_hot(g.node_states, params.x_in)
    eo = _one_hot(g.edge_states, params.e_in)
    adj_oh = np.zeros((n, n, params.e_in))
    adj_oh[iu[0], iu[1]] = eo
    adj_oh[iu[1], iu[0]] = eo
    denom = max(n - 1, 1)
    incident = adj_oh.sum(axis=1) / denom
    deg = g.skeleton(absent).sum(axis=1) / denom
    g_node = xo.mean(axis=0) if n else np.zeros(params.x_in)
    g_edge = eo.mean(axis=0) if eo.shape[0] else np.zeros(params.e_in)
    lab = np.zeros(params.label_dim)
    if params.label_dim:
        if label is not None and not 0 <= label < params.n_labels:
            raise ValueError(f"label {label} outside [0, {params.n_labels})")
        lab[0 if label is None else label + 1] = 1.0

    def tile(v, rows):
        return np.broadcast_to(v, (rows, v.size))

    node_in = np.hstack([xo, feats.node_feats, deg[:, None], incident, tile(g_node, n), tile(g_edge, n),
                         np.full((n, 1), t), tile(lab, n)])
    m = iu[0].size
    edge_in = np.hstack([eo, feats.edge_feats, feats.node_feats[iu[0]] + feats.node_feats[iu[1]],
                         xo[iu[0]] + xo[iu[1]], (deg[iu[0]] + deg[iu[1]])[:, None],
                         tile(g_node, m), tile(g_edge, m), np.full((m, 1), t), tile(lab, m)])
    return node_in, edge_in


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _mlp(x, W1, b1, W2, b2):
    h = np.tanh(x @ W1 + b1)
    return h, h @ W2 + b2


def predict(params: DenoiserParams, g_t: CategoricalGraph, t: float, label: int | None = None) -> ProbGraph:
    node_in, edge_in = featurize(params, g_t, t, label)
    T = params.tensors
    _, ln = _mlp(node_in, T["Wn1"], T["bn1"], T["Wn2"], T["bn2"])
    _, le = _mlp(edge_in, T["We1"], T["be1"], T["We2"], T["be2"])
    return ProbGraph(_softmax(ln), _softmax(le))


class FeaturizedDenoiser:
    def __init__(self, params: DenoiserParams):
        self.params = params
        self.x_card, self.e_card = params.x_card, params.e_card

    def predict(self, g_t: CategoricalGraph, t: float, label=None) -> ProbGraph:
        return predict(self.params, g_t, t, label)


def _head_grad(x, targets, weight, W1, b1, W2, b2):
    """CE loss and gradients of one MLP head summed over its rows."""
    h, logits = _mlp(x, W1, b1, W2, b2)
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    rows = np.arange(targets.size)
    loss = -weight * logp[rows, targets].sum()
    dlogits = np.exp(logp)
    dlogits[rows, targets] -= 1.0
    dlogits *= weight
    dW2 = h.T @ dlogits
    db2 = dlogits.sum(axis=0)
    dpre = (dlogits @ W2.T) * (1.0 - h * h)
    return loss, (x.T @ dpre, dpre.sum(axis=0), dW2, db2)


def loss_and_grad(params: DenoiserParams, batch, lam: float) -> tuple[float, dict[str, np.ndarray]]:
    """Mean weighted cross-entropy over ``(g1, g_t, t, label)`` items and its exact gradient."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    T = params.tensors
    grads = {k: np.zeros_like(v) for k, v in T.items()}
    total = 0.0
    for g1, g_t, t, label in batch:
        node_in, edge_in = featurize(params, g_t, t, label)
        ln, gn = _head_grad(node_in, g1.node_states, 1.0, T["Wn1"], T["bn1"], T["Wn2"], T["bn2"])
        le, ge = _head_grad(edge_in, g1.edge_states, lam, T["We1"], T["be1"], T["We2"], T["be2"])
        total += ln + le
        for name, g in zip(("Wn1", "bn1", "Wn2", "bn2"), gn):
            grads[name] += g
        for name, g in zip(("We1", "be1", "We2", "be2"), ge):
            grads[name] += g
    scale = 1.0 / len(batch)
    return total * scale, {k: v * scale for k, v in grads.items()}
