"""Clustering quality: modularity, adjusted Rand index, and parameter sweeps.

Unclustered vertices (hubs and outliers) count as singleton clusters in
both metrics.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .index import ScanIndex
from .query import Clustering, QueryParams, cluster

DEFAULT_MUS = tuple(2 ** i for i in range(1, 19))
DEFAULT_EPSILONS = tuple(round(i / 100, 2) for i in range(1, 100))


def partition_labels(clustering) -> np.ndarray:
    """Cluster labels with every unclustered vertex moved to its own fresh label."""
    assign = clustering.assignment if isinstance(clustering, Clustering) else np.asarray(clustering)
    assign = np.asarray(assign, dtype=np.int64)
    n = len(assign)
    return np.where(assign >= 0, assign, n + np.arange(n))


def modularity(graph: Graph, clustering) -> float:
    """Newman modularity; weighted graphs use edge weights and weighted degrees."""
    if graph.m == 0:
        raise ValueError("modularity is undefined for a graph without edges")
    labels = partition_labels(clustering)
    if len(labels) != graph.n:
        raise ValueError("clustering and graph disagree on vertex count")
    w = graph.weights if graph.weighted else np.ones(2 * graph.m)
    two_m = w.sum()
    src, dst = graph.sources, graph.neighbors
    internal = w[labels[src] == labels[dst]].sum()
    _, inv = np.unique(labels, return_inverse=True)
    strength = np.zeros(graph.n)
    np.add.at(strength, src, w)
    mass = np.bincount(inv, weights=strength)
    return float(internal / two_m - np.dot(mass, mass) / (two_m * two_m))


@dataclass(frozen=True)
class ContingencyCounts:
    """Nonzero cells n_ij (with their row/column indices) plus marginals."""

    rows: np.ndarray
    cols: np.ndarray
    cells: np.ndarray
    row_sums: np.ndarray
    col_sums: np.ndarray
    n: int


def contingency(a, b) -> ContingencyCounts:
    la, lb = partition_labels(a), partition_labels(b)
    if len(la) != len(lb):
        raise ValueError("clusterings cover different vertex sets")
    _, ia = np.unique(la, return_inverse=True)
    _, ib = np.unique(lb, return_inverse=True)
    pairs, cells = np.unique(np.stack([ia, ib]), axis=1, return_counts=True)
    return ContingencyCounts(pairs[0], pairs[1], cells, np.bincount(ia), np.bincount(ib), len(la))


def _pairs(x: np.ndarray) -> int:
    x = np.asarray(x, dtype=np.int64)
    return int((x * (x - 1) // 2).sum())


def adjusted_rand_index(a, b) -> float:
    """Hubert-Arabie ARI.

    When the chance term leaves a zero denominator (both partitions
    all-singleton or both a single cluster, or n < 2) the result is 1 for
    identical partitions and 0 otherwise.
    """
    cc = contingency(a, b)
    total = cc.n * (cc.n - 1) // 2
    index = _pairs(cc.cells)
    rows, cols = _pairs(cc.row_sums), _pairs(cc.col_sums)
    # numerator and denominator both scaled by 2 * C(n, 2); exact in Python ints
    num = 2 * total * index - 2 * rows * cols
    den = total * (rows + cols) - 2 * rows * cols
    if den == 0:
        identical = len(cc.cells) == len(cc.row_sums) == len(cc.col_sums)
        return 1.0 if identical else 0.0
    return num / den


@dataclass
class SweepResult:
    rows: list[tuple[int, float, float]] = field(default_factory=list)
    best: tuple[int, float, float] | None = None

    def to_csv(self) -> str:
        lines = ["mu,epsilon,score"]
        lines += [f"{mu},{eps!r},{score!r}" for mu, eps, score in self.rows]
        if self.best is not None:
            mu, eps, score = self.best
            lines.append(f"# argmax mu={mu} epsilon={eps!r} score={score!r}")
        return "\n".join(lines) + "\n"


def sweep(index: ScanIndex, mus=DEFAULT_MUS, epsilons=DEFAULT_EPSILONS, metric: str = "modularity",
          ground_truth=None, *, threads: int | None = 1) -> SweepResult:
    """Score the deterministic-border clustering at every (mu, epsilon) grid point.

    The argmax prefers smaller mu, then smaller epsilon, among equal scores.
    """
    if metric == "ari" and ground_truth is None:
        raise ValueError("ARI needs a ground-truth clustering")
    if metric not in ("modularity", "ari"):
        raise ValueError(f"unknown metric {metric!r}")
    result = SweepResult()
    for mu in sorted(set(int(m) for m in mus)):
        for eps in sorted(set(float(e) for e in epsilons)):
            c = cluster(index, QueryParams(mu, eps, True), threads=threads)
            score = modularity(index.graph, c) if metric == "modularity" \
                else adjusted_rand_index(c, ground_truth)
            result.rows.append((mu, eps, score))
            if result.best is None or score > result.best[2]:
                result.best = (mu, eps, score)
    return result
