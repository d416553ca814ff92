"""Exact structural similarity of every edge.

Shared-neighbor counts come from merging sorted out-lists in the
degree-oriented graph: each triangle is found once, from its lowest-ranked
vertex, and credited to all three of its edges.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._parallel import map_chunks
from .graph import DirectedView, Graph, degree_oriented_view

EXACT_MEASURES = ("cosine", "jaccard", "weighted-cosine")
APPROX_MEASURES = ("approx-cosine", "approx-jaccard")
MEASURES = EXACT_MEASURES + APPROX_MEASURES


@dataclass(frozen=True, eq=False)
class SimilarityTable:
    """Per-half-edge scores; ``scores[p] == scores[twin(p)]`` bit for bit."""

    scores: np.ndarray
    measure: str

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimilarityTable):
            return NotImplemented
        return self.measure == other.measure and self.scores.tobytes() == other.scores.tobytes()

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return len(self.scores)


def vertex_norms(graph: Graph) -> np.ndarray:
    """sqrt(1 + sum of squared incident weights), i.e. the closed-neighborhood norm with w(v,v)=1."""
    sq = np.zeros(graph.n)
    np.add.at(sq, graph.sources, graph.weights * graph.weights)
    return np.sqrt(1.0 + sq)


def _skip_mask(graph: Graph, skip_src) -> np.ndarray:
    if skip_src is None:
        return np.zeros(graph.n, dtype=np.bool_)
    return np.asarray(skip_src, dtype=np.bool_)


def _directed_counts(graph: Graph, view: DirectedView, threads, skip_src=None) -> np.ndarray:
    skip = _skip_mask(graph, skip_src)
    m = len(view.targets)

    def work(lo, hi):
        buf = np.zeros(m, dtype=np.int64)
        K.count_triangles(lo, hi, view.out_offsets, view.targets, skip, buf)
        return buf

    parts = map_chunks(work, graph.n, threads)
    total = parts[0]
    for extra in parts[1:]:
        total += extra  # integer sums: order cannot matter
    return total


def _directed_dots(graph: Graph, view: DirectedView, threads, skip_src=None,
                   closed: bool = False) -> np.ndarray:
    """Weighted shared-neighbor dot products per directed edge, summed by ascending shared id."""
    skip = _skip_mask(graph, skip_src)
    wdir = graph.weights[view.positions]

    def work(lo, hi):
        return K.triangle_contributions(lo, hi, view.out_offsets, view.targets, wdir, skip)

    parts = map_chunks(work, graph.n, threads)
    edge = [p[0] for p in parts]
    third = [p[1] for p in parts]
    value = [p[2] for p in parts]
    if closed:
        # endpoints of the edge: w(u,u)w(v,u) = w(u,v)w(v,v) = w(u,v)
        j = np.arange(len(view.targets), dtype=np.int64)
        src = graph.sources[view.positions]
        edge += [j, j]
        third += [src, view.targets]
        value += [wdir, wdir]
    edge = np.concatenate(edge)
    third = np.concatenate(third)
    value = np.concatenate(value)
    order = np.lexsort((third, edge))
    return K.segmented_sum(edge[order], value[order], len(view.targets))


def _spread(graph: Graph, view: DirectedView, per_directed: np.ndarray, dtype) -> np.ndarray:
    out = np.empty(2 * graph.m, dtype=dtype)
    out[view.positions] = per_directed
    out[graph.twins[view.positions]] = per_directed
    return out


def intersect_counts_via_merge(graph: Graph, view: DirectedView | None = None, *,
                               weighted: bool = False, threads: int | None = 1) -> np.ndarray:
    """|N(u) ∩ N(v)| for every half-edge, or sum of w(u,x)w(v,x) over shared x when ``weighted``."""
    view = degree_oriented_view(graph) if view is None else view
    if weighted:
        return _spread(graph, view, _directed_dots(graph, view, threads), np.float64)
    return _spread(graph, view, _directed_counts(graph, view, threads), np.int64)


def exact_directed_scores(graph: Graph, view: DirectedView, measure: str, threads,
                          skip_src=None) -> np.ndarray:
    src = graph.sources[view.positions]
    dst = view.targets
    if measure == "weighted-cosine":
        num = _directed_dots(graph, view, threads, skip_src, closed=True)
        norms = vertex_norms(graph)
        scores = num / (norms[src] * norms[dst])
    else:
        inter = (_directed_counts(graph, view, threads, skip_src) + 2).astype(np.float64)
        a = (graph.degrees[src] + 1).astype(np.float64)
        b = (graph.degrees[dst] + 1).astype(np.float64)
        if measure == "cosine":
            scores = inter / np.sqrt(a * b)
        else:
            scores = inter / (a + b - inter)
    return np.minimum(scores, 1.0)


def check_measure(graph: Graph, measure: str) -> None:
    if measure not in EXACT_MEASURES:
        raise ValueError(f"unknown exact measure {measure!r}; expected one of {EXACT_MEASURES}")
    if measure == "weighted-cosine" and not graph.weighted:
        raise ValueError("weighted-cosine requires a weighted graph")


def compute_similarities(graph: Graph, measure: str = "cosine", *,
                         threads: int | None = 1) -> SimilarityTable:
    """Exact similarity for every half-edge.

    ``cosine`` and ``jaccard`` treat all weights as 1; ``weighted-cosine``
    uses the edge weights with w(x, x) = 1.
    """
    check_measure(graph, measure)
    view = degree_oriented_view(graph)
    per_edge = exact_directed_scores(graph, view, measure, threads)
    return SimilarityTable(_spread(graph, view, per_edge, np.float64), measure)
