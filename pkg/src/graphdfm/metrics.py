"""Graph validity predicates, V.U.N., MMD statistics and the Ratio metric."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .graph import CategoricalGraph, GraphDataset, are_isomorphic, invariant_key, isomorphism_classes
from .planarity import lr_planar

log = logging.getLogger(__name__)

STATISTICS = ("degree", "clustering", "spectral")
CLUSTERING_BINS = 100
SPECTRAL_BINS = 200


def is_connected(g: CategoricalGraph) -> bool:
    if g.n_nodes <= 1:
        return True
    n_comp, _ = connected_components(g.skeleton(), directed=False)
    return n_comp == 1


def is_tree(g: CategoricalGraph) -> bool:
    return g.n_nodes >= 1 and int((g.edge_states != 0).sum()) == g.n_nodes - 1 and is_connected(g)


def is_planar(g: CategoricalGraph) -> bool:
    return lr_planar(g.n_nodes, [(i, j) for i, j, _ in g.edge_list()])


def is_connected_planar(g: CategoricalGraph) -> bool:
    return is_connected(g) and is_planar(g)


VALIDITY: dict[str, Callable[[CategoricalGraph], bool]] = {
    "tree": is_tree,
    "planar": is_connected_planar,
    "any": lambda g: True,
}


@dataclass
class VunReport:
    valid_frac: float
    unique_frac: float
    novel_frac: float
    vun_frac: float


def vun(generated: Sequence[CategoricalGraph], train: GraphDataset, validity=is_tree) -> VunReport:
    """Validity, uniqueness (isomorphism classes / count), novelty and their conjunction.

    A graph counts toward V.U.N. when it is valid, novel, and the first member
    of its isomorphism class among the generated graphs.
    """
    n = len(generated)
    if n == 0:
        raise ValueError("no generated graphs")
    valid = [bool(validity(g)) for g in generated]
    classes = isomorphism_classes(generated)
    first = [classes[k] == k for k in range(n)]
    buckets: dict[tuple, list[CategoricalGraph]] = {}
    for h in train.graphs:
        buckets.setdefault(invariant_key(h), []).append(h)
    novel_by_class = {}
    novel = []
    for k, g in enumerate(generated):
        c = classes[k]
        if c not in novel_by_class:
            novel_by_class[c] = not any(are_isomorphic(g, h) for h in buckets.get(invariant_key(g), []))
        novel.append(novel_by_class[c])
    vun_count = sum(v and f and nv for v, f, nv in zip(valid, first, novel))
    return VunReport(sum(valid) / n, sum(first) / n, sum(novel) / n, vun_count / n)


# ---------------------------------------------------------------------------
# graph statistics


@dataclass
class GraphStats:
    degree_hist: np.ndarray
    clustering: np.ndarray
    spectrum: np.ndarray


def graph_stats(g: CategoricalGraph) -> GraphStats:
    A = g.skeleton()
    deg = A.sum(axis=1)
    hist = np.bincount(deg.astype(np.int64), minlength=1).astype(np.float64) if g.n_nodes else np.zeros(1)
    tri = np.diagonal(A @ A @ A) / 2.0
    pairs = deg * (deg - 1) / 2.0
    clust = np.divide(tri, pairs, out=np.zeros_like(tri), where=pairs > 0)
    inv_sqrt = np.divide(1.0, np.sqrt(deg), out=np.zeros_like(deg), where=deg > 0)
    lap = np.diag((deg > 0).astype(np.float64)) - inv_sqrt[:, None] * A * inv_sqrt[None, :]
    spectrum = np.linalg.eigvalsh(lap) if g.n_nodes else np.zeros(0)
    return GraphStats(hist, clust, spectrum)


def descriptor(stats: GraphStats, which: str, max_degree: int) -> np.ndarray:
    """Fixed-length, simplex-normalised descriptor vector for one statistic."""
    if which == "degree":
        v = np.zeros(max_degree + 1)
        v[: stats.degree_hist.size] = stats.degree_hist
    elif which == "clustering":
        v, _ = np.histogram(stats.clustering, bins=CLUSTERING_BINS, range=(0.0, 1.0))
    elif which == "spectral":
        # round off solver noise so eigenvalues on a bin edge (0, 1, 2, ...) bin the same way every time
        spec = np.clip(np.round(stats.spectrum, 9), 0.0, 2.0)
        v, _ = np.histogram(spec, bins=SPECTRAL_BINS, range=(0.0, 2.0))
    else:
        raise ValueError(f"unknown statistic {which!r}")
    v = np.asarray(v, dtype=np.float64)
    total = v.sum()
    return v / total if total > 0 else v


def _sqdist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum((a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2 * a @ b.T, 0.0)


def median_bandwidth(samples) -> float:
    x = np.asarray(samples, dtype=np.float64)
    if len(x) < 2:
        return 1.0
    d = np.sqrt(_sqdist(x, x))[np.triu_indices(len(x), k=1)]
    med = float(np.median(d))
    return med if med > 0 else 1.0


def mmd2(samples_a, samples_b, bandwidth: float, biased: bool = False) -> float:
    """Squared MMD with a Gaussian kernel ``exp(-|x-y|^2 / (2 s^2))``.

    The unbiased form drops self-pairs from the within-set means; a singleton
    set has no such pairs and falls back to the biased within term.
    """
    a = np.atleast_2d(np.asarray(samples_a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(samples_b, dtype=np.float64))
    if len(a) == 0 or len(b) == 0:
        raise ValueError("empty sample set")
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    scale = 2.0 * bandwidth ** 2

    def within(x):
        K = np.exp(-_sqdist(x, x) / scale)
        m = len(x)
        if biased or m < 2:
            return K.mean()
        return (K.sum() - np.trace(K)) / (m * (m - 1))

    cross = np.exp(-_sqdist(a, b) / scale).mean()
    return float(within(a) + within(b) - 2.0 * cross)


@dataclass
class MmdReport:
    mmd2: dict[str, float]
    bandwidth: dict[str, float] = field(default_factory=dict)


def _descriptors(graphs, which, max_degree):
    return np.stack([descriptor(graph_stats(g), which, max_degree) for g in graphs])


def mmd_report(graphs: Sequence[CategoricalGraph], reference: Sequence[CategoricalGraph],
               statistics=STATISTICS, biased: bool = False) -> MmdReport:
    """MMD^2 per statistic; bandwidth is the median pairwise distance within ``reference``."""
    max_degree = max(max(g.n_nodes for g in graphs), max(g.n_nodes for g in reference))
    out, bws = {}, {}
    for s in statistics:
        a = _descriptors(graphs, s, max_degree)
        b = _descriptors(reference, s, max_degree)
        bw = median_bandwidth(b)
        out[s] = max(mmd2(a, b, bw, biased), 0.0)
        bws[s] = bw
    return MmdReport(out, bws)


def ratio_from_reports(gen_test: MmdReport, train_test: MmdReport, eps: float = 1e-12) -> tuple[float, list[str]]:
    used = [s for s in gen_test.mmd2 if train_test.mmd2.get(s, 0.0) > eps]
    if not used:
        raise ValueError("every statistic has zero train/test MMD; ratio undefined")
    return float(np.mean([gen_test.mmd2[s] / train_test.mmd2[s] for s in used])), used


def ratio_metric(gen, test, train, statistics=STATISTICS) -> float:
    """Mean over statistics of ``MMD(gen, test) / MMD(train, test)``, skipping zero denominators."""
    if not (len(gen) and len(test) and len(train)):
        raise ValueError("all three graph sets must be non-empty")
    return ratio_from_reports(mmd_report(gen, test, statistics), mmd_report(train, test, statistics))[0]


def evaluate(generated, train: GraphDataset, test: GraphDataset, validity: str = "tree") -> dict:
    gen_test = mmd_report(generated, test.graphs)
    train_test = mmd_report(train.graphs, test.graphs)
    try:
        ratio, used = ratio_from_reports(gen_test, train_test)
    except ValueError as exc:
        log.warning("%s", exc)
        ratio, used = None, []
    report = asdict(vun(generated, train, VALIDITY[validity]))
    for s in STATISTICS:
        report[f"{s}_mmd2"] = gen_test.mmd2[s]
        report[f"{s}_mmd2_train"] = train_test.mmd2[s]
    report["ratio"] = ratio
    report["ratio_statistics"] = used
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_csv(report: dict) -> str:
    """One ``metric,value`` row per scalar metric."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "value"])
    for k in sorted(report):
        if isinstance(report[k], (int, float)):
            w.writerow([k, repr(float(report[k]))])
    return buf.getvalue()
