"""LSH-approximated edge similarities.

SimHash estimates cosine similarity from sign bits of random projections;
MinHash (standard or k-partition) estimates Jaccard similarity. The hybrid
table only approximates edges whose endpoints both have high degree and
scores every other edge exactly.

Random projection coordinates r_i[x] are a pure function of (seed, i, x)
(a counter-based hash fed through Box-Muller), so neighboring vertices see
the same coordinates and sketches do not depend on evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._parallel import map_chunks
from .graph import Graph, degree_oriented_view
from .similarity import SimilarityTable, _spread, check_measure, exact_directed_scores

SCHEMES = ("simhash", "minhash-standard", "minhash-kpartition")


@dataclass(frozen=True)
class ApproxConfig:
    k: int
    seed: int = 0
    scheme: str = "simhash"
    heuristic_threshold: float | None = None  # None: k for simhash, 3k/2 for minhash

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def threshold(self) -> float:
        if self.heuristic_threshold is not None:
            return self.heuristic_threshold
        return float(self.k) if self.scheme == "simhash" else 1.5 * self.k

    @property
    def measure(self) -> str:
        return "approx-cosine" if self.scheme == "simhash" else "approx-jaccard"


@dataclass(frozen=True)
class Sketches:
    """Sketch rows for ``vertices``; ``densified`` is all False except for k-partition MinHash."""

    vertices: np.ndarray
    values: np.ndarray
    densified: np.ndarray | None = None

    def row_of(self, v: int) -> int:
        idx = int(np.searchsorted(self.vertices, v))
        if idx == len(self.vertices) or self.vertices[idx] != v:
            raise KeyError(v)
        return idx

    def __getitem__(self, v: int) -> np.ndarray:
        return self.values[self.row_of(v)]


def _vertices(graph: Graph, vertices) -> np.ndarray:
    if vertices is None:
        return np.arange(graph.n, dtype=np.int64)
    return np.unique(np.asarray(vertices, dtype=np.int64))


def simhash_sketch_all(graph: Graph, config: ApproxConfig, vertices=None, *,
                       threads: int | None = 1) -> Sketches:
    if config.scheme != "simhash":
        raise ValueError("simhash sketches need scheme='simhash'")
    verts = _vertices(graph, vertices)
    bits = np.zeros((len(verts), config.k), dtype=np.uint8)

    def work(lo, hi):
        K.simhash_rows(lo, hi, verts, graph.offsets, graph.neighbors, graph.weights,
                       config.k, np.uint64(config.seed), bits)

    map_chunks(work, len(verts), threads)
    return Sketches(verts, bits)


def minhash_sketch_all(graph: Graph, config: ApproxConfig, vertices=None, *,
                       threads: int | None = 1) -> Sketches:
    if not config.scheme.startswith("minhash"):
        raise ValueError("minhash sketches need a minhash scheme")
    if graph.weighted:
        raise ValueError("MinHash supports unweighted graphs only")
    verts = _vertices(graph, vertices)
    values = np.zeros((len(verts), config.k), dtype=np.uint64)
    densified = np.zeros((len(verts), config.k), dtype=np.bool_)
    kpart = config.scheme == "minhash-kpartition"

    def work(lo, hi):
        K.minhash_rows(lo, hi, verts, graph.offsets, graph.neighbors, config.k,
                       np.uint64(config.seed), kpart, values, densified)

    map_chunks(work, len(verts), threads)
    return Sketches(verts, values, densified)


def simhash_sketch(indices, values, k: int, seed: int = 0) -> np.ndarray:
    """SimHash bits of a sparse vector given as parallel (index, value) arrays."""
    return K.simhash_vector(np.asarray(indices, dtype=np.int64),
                            np.asarray(values, dtype=np.float64), k, np.uint64(seed))


def minhash_sketch(elements, k: int, seed: int = 0, variant: str = "standard"):
    """MinHash of a non-empty integer set; returns ``(values, densified)``."""
    el = np.asarray(sorted(set(elements)), dtype=np.int64)
    if not len(el):
        raise ValueError("MinHash of an empty set is undefined")
    values = np.zeros(k, dtype=np.uint64)
    densified = np.zeros(k, dtype=np.bool_)
    if variant == "standard":
        K.minhash_standard_set(el, k, np.uint64(seed), values)
    elif variant == "kpartition":
        K.minhash_kpartition_set(el, k, np.uint64(seed), values, densified)
    else:
        raise ValueError(f"unknown MinHash variant {variant!r}")
    return values, densified


def simhash_similarity(a, b) -> float:
    """max(0, cos(pi * d / k)) for d differing bits out of k."""
    if len(a) != len(b):
        raise ValueError("sketch lengths differ")
    return float(K.simhash_score(np.asarray(a, dtype=np.uint8), np.asarray(b, dtype=np.uint8)))


def minhash_similarity(a, b, densified_a=None, densified_b=None) -> float:
    """Fraction of matching coordinates, skipping slots densified on both sides."""
    if len(a) != len(b):
        raise ValueError("sketch lengths differ")
    if (densified_a is None) != (densified_b is None):
        raise ValueError("cannot compare standard and k-partition sketches")
    k = len(a)
    da = np.zeros(k, np.bool_) if densified_a is None else np.asarray(densified_a, np.bool_)
    db = np.zeros(k, np.bool_) if densified_b is None else np.asarray(densified_b, np.bool_)
    return float(K.minhash_score(np.asarray(a, np.uint64), da, np.asarray(b, np.uint64), db))


def _default_exact(graph: Graph, config: ApproxConfig) -> str:
    if config.scheme == "simhash":
        return "weighted-cosine" if graph.weighted else "cosine"
    return "jaccard"


def compute_similarities_hybrid(graph: Graph, config: ApproxConfig,
                                exact_measure: str | None = None, *,
                                threads: int | None = 1) -> SimilarityTable:
    """Approximate high-degree/high-degree edges, score the rest exactly.

    A vertex is high-degree when its degree exceeds ``config.threshold``.
    Only high-degree vertices with at least one high-degree neighbor are
    sketched.
    """
    exact_measure = exact_measure or _default_exact(graph, config)
    check_measure(graph, exact_measure)
    if config.scheme == "simhash" and exact_measure == "jaccard":
        raise ValueError("simhash approximates cosine, not jaccard")
    if config.scheme != "simhash" and exact_measure != "jaccard":
        raise ValueError("minhash approximates jaccard")
    if config.scheme != "simhash" and graph.weighted:
        raise ValueError("MinHash supports unweighted graphs only")

    view = degree_oriented_view(graph)
    high = graph.degrees > config.threshold
    # a high source has only high targets, and every triangle it closes is all-high
    per_edge = exact_directed_scores(graph, view, exact_measure, threads, skip_src=high)
    src = graph.sources[view.positions]
    approx = np.flatnonzero(high[src] & high[view.targets])
    measure = exact_measure
    if len(approx):
        measure = config.measure
        eu, ev = src[approx], view.targets[approx]
        sketch_set = np.unique(np.concatenate([eu, ev]))
        row_u = np.searchsorted(sketch_set, eu)
        row_v = np.searchsorted(sketch_set, ev)
        out = np.empty(len(approx))
        if config.scheme == "simhash":
            sk = simhash_sketch_all(graph, config, sketch_set, threads=threads)
            map_chunks(lambda lo, hi: K.simhash_edge_scores(lo, hi, row_u, row_v, sk.values, out),
                       len(approx), threads)
        else:
            sk = minhash_sketch_all(graph, config, sketch_set, threads=threads)
            map_chunks(lambda lo, hi: K.minhash_edge_scores(lo, hi, row_u, row_v, sk.values,
                                                            sk.densified, out),
                       len(approx), threads)
        per_edge[approx] = out
    return SimilarityTable(_spread(graph, view, per_edge, np.float64), measure)


def approximate_all(graph: Graph, config: ApproxConfig, *, threads: int | None = 1) -> SimilarityTable:
    """Approximate every edge (no low-degree exemption)."""
    cfg = ApproxConfig(config.k, config.seed, config.scheme, heuristic_threshold=-1.0)
    return compute_similarities_hybrid(graph, cfg, threads=threads)


def _ceil(x: float) -> int:
    # rounding noise in log/sqrt inputs must not push an exact integer up by one
    return math.ceil(x * (1 - 1e-12))


def required_samples(n: float, m: float, delta: float, scheme: str) -> int:
    """Sample count for classification accuracy outside a width-``delta`` band, w.h.p."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    base = math.log(n * m) / (2 * delta * delta)
    if scheme == "simhash":
        return _ceil(math.pi ** 2 * base)
    if scheme.startswith("minhash"):
        return _ceil(base)
    raise ValueError(f"unknown scheme {scheme!r}")
