"""Denoiser training: noising, weighted cross-entropy, SGD, and the loss-vs-time sweep."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields

import numpy as np

from . import distortion
from .denoiser import DenoiserParams, ProbGraph, loss_and_grad
from .graph import CategoricalGraph, GraphDataset
from .initial import InitialDistribution, build_initial

log = logging.getLogger(__name__)

PROB_FLOOR = 1e-30


def ce_lambda(g1: CategoricalGraph, pred: ProbGraph, lam: float) -> float:
    """``-sum_n log p_n(x_n) - lam * sum_{i<j} log p_ij(e_ij)`` with probabilities floored at 1e-30."""
    if pred.node_probs.shape[0] != g1.n_nodes or pred.edge_probs.shape[0] != g1.edge_states.size:
        raise ValueError("prediction does not match the graph dimensions")
    pn = np.maximum(pred.node_probs[np.arange(g1.n_nodes), g1.node_states], PROB_FLOOR)
    pe = np.maximum(pred.edge_probs[np.arange(g1.edge_states.size), g1.edge_states], PROB_FLOOR)
    return float(-np.log(pn).sum() - lam * np.log(pe).sum())


def noise_graph(g1: CategoricalGraph, t: float, init: InitialDistribution, rng: np.random.Generator) -> CategoricalGraph:
    """Draw ``G_t ~ p_{t|1}(. | g1)`` independently per dimension."""
    keep_n = rng.random(g1.n_nodes) < t
    keep_e = rng.random(g1.edge_states.size) < t
    src_n = rng.choice(init.node_states, size=g1.n_nodes, p=init.node_p0)
    src_e = rng.choice(init.edge_states, size=g1.edge_states.size, p=init.edge_p0)
    nodes = np.where(keep_n, g1.node_states, src_n)
    edges = np.where(keep_e, g1.edge_states, src_e)
    return CategoricalGraph(g1.n_nodes, nodes, edges, init.node_states, init.edge_states)


@dataclass
class TrainConfig:
    lam: float = 5.0
    train_distortion: str = "identity"
    initial_distribution: str = "marginal"
    epochs: int = 100
    batch_size: int = 8
    noise_draws: int = 1
    learning_rate: float = 0.05
    momentum: float = 0.9
    seed: int = 0
    conditional: bool = False
    label_drop: float = 0.1
    hidden: int = 32
    rrwp_depth: int = 12
    init_scale: float = 1.0
    grad_clip: float = 5.0          # global gradient-norm cap; 0 disables

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.grad_clip < 0:
            raise ValueError("grad_clip must be non-negative")
        if not 0.0 <= self.label_drop <= 1.0:
            raise ValueError("label_drop must be in [0, 1]")
        if self.train_distortion not in distortion.KINDS:
            raise ValueError(f"unknown train_distortion {self.train_distortion!r}")

    @classmethod
    def from_mapping(cls, values: dict) -> "TrainConfig":
        known = {f.name: f for f in fields(cls)}
        kw = {}
        for k, v in values.items():
            if k in known:
                kw[k] = _coerce(v, type(getattr(cls(), k)))
        return cls(**kw)


def _coerce(value, typ):
    if isinstance(value, typ):
        return value
    if typ is bool:
        return str(value).strip().lower() in ("1", "true", "yes", "on")
    return typ(value)


@dataclass
class TrainResult:
    params: DenoiserParams
    init: InitialDistribution
    epoch_loss: list[float] = field(default_factory=list)
    used_times: list[float] = field(default_factory=list)
    checkpoints: dict[int, DenoiserParams] = field(default_factory=dict)


def sgd_step(params: DenoiserParams, grads: dict, velocity: dict, lr: float, momentum: float,
             clip: float = 0.0):
    if clip > 0:
        norm = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
        if norm > clip:
            grads = {k: g * (clip / norm) for k, g in grads.items()}
    for k, g in grads.items():
        velocity[k] = momentum * velocity[k] - lr * g
        params.tensors[k] = params.tensors[k] + velocity[k]


def train(dataset: GraphDataset, cfg: TrainConfig, rng: np.random.Generator | None = None,
          init: InitialDistribution | None = None, checkpoint_epochs=(), params: DenoiserParams | None = None
          ) -> TrainResult:
    """Fit the featurised denoiser with SGD.

    Each epoch visits every graph ``noise_draws`` times in shuffled order; each
    visit draws its own distorted time and noisy graph. Labels (conditional
    runs) are dropped independently with probability ``label_drop``; a drop
    uniform is consumed for every item in all modes so that unconditional
    training and ``label_drop = 1`` see identical random streams.
    """
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    init = init or build_initial(cfg.initial_distribution, dataset)
    n_labels = dataset.n_labels if dataset.labels is not None else 0
    if params is None:
        params = DenoiserParams.init(dataset.x_card, dataset.e_card, init.node_states, init.edge_states,
                                     cfg.rrwp_depth, cfg.hidden, n_labels, rng=rng, scale=cfg.init_scale)
    velocity = {k: np.zeros_like(v) for k, v in params.tensors.items()}
    result = TrainResult(params, init)
    if 0 in checkpoint_epochs:
        result.checkpoints[0] = params.copy()
    for epoch in range(1, cfg.epochs + 1):
        order = np.concatenate([rng.permutation(len(dataset)) for _ in range(cfg.noise_draws)])
        losses = []
        for start in range(0, order.size, cfg.batch_size):
            batch = []
            for k in order[start:start + cfg.batch_size]:
                g1 = dataset.graphs[k]
                t = float(distortion.sample_times(cfg.train_distortion, 1, rng)[0])
                result.used_times.append(t)
                g_t = noise_graph(g1, t, init, rng)
                drop = rng.random() < cfg.label_drop
                label = None
                if cfg.conditional and n_labels and not drop:
                    label = dataset.labels[k]
                batch.append((g1, g_t, t, label))
            loss, grads = loss_and_grad(params, batch, cfg.lam)
            losses.append(loss)
            sgd_step(params, grads, velocity, cfg.learning_rate, cfg.momentum, cfg.grad_clip)
        result.epoch_loss.append(float(np.mean(losses)))
        log.debug("epoch %d loss %.5f", epoch, result.epoch_loss[-1])
        if epoch in checkpoint_epochs:
            result.checkpoints[epoch] = params.copy()
    return result


def loss_vs_time(denoiser, dataset: GraphDataset, init: InitialDistribution, t_grid, n_draws: int, lam: float,
                 rng: np.random.Generator) -> list[tuple[float, float]]:
    """Mean CE over ``n_draws`` noised copies of every graph at each grid time."""
    out = []
    for t in t_grid:
        if not 0.0 <= t < 1.0:
            raise ValueError("grid times must lie in [0, 1)")
        vals = []
        for _ in range(n_draws):
            for k, g1 in enumerate(dataset.graphs):
                g_t = noise_graph(g1, t, init, rng)
                vals.append(ce_lambda(g1, denoiser.predict(g_t, t), lam))
        out.append((float(t), float(np.mean(vals))))
    return out


def rate_probes(dataset: GraphDataset, init: InitialDistribution, n_probes: int, rng: np.random.Generator,
                t_range=(0.05, 0.95)) -> list[tuple[CategoricalGraph, float]]:
    """Random ``(G_t, t)`` pairs drawn from the noising path of the dataset."""
    out = []
    for _ in range(n_probes):
        g1 = dataset.graphs[int(rng.integers(len(dataset)))]
        t = float(rng.uniform(*t_range))
        out.append((noise_graph(g1, t, init, rng), t))
    return out


def rate_gap(model, reference, init: InitialDistribution, probes, cfg=None) -> float:
    """Mean over probes of the summed absolute difference of the expected rate rows.

    ``reference`` is normally the exact oracle, so the value measures how far
    the model's CTMC is from the one that generates the data path.
    """
    from .ctmc import RateConfig, block_tables
    from .kernels import expected_rates

    cfg = cfg or RateConfig()
    gaps = []
    for g_t, t in probes:
        node_tab, edge_tab = block_tables(init, t, cfg)
        pm, pr = model.predict(g_t, t), reference.predict(g_t, t)
        total = 0.0
        for states, tab, a, b in ((g_t.node_states, node_tab, pm.node_probs, pr.node_probs),
                                  (g_t.edge_states, edge_tab, pm.edge_probs, pr.edge_probs)):
            total += float(np.abs(expected_rates(states, a, tab) - expected_rates(states, b, tab)).sum())
        gaps.append(total)
    return float(np.mean(gaps))
