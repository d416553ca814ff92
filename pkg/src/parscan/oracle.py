"""Brute-force SCAN straight from the definitions, for testing only.

Nothing here touches the index, the triangle kernels or the union-find: sets
are intersected directly and clusters grown by breadth-first search. The
closing division of each similarity uses the same floating-point expression
as the fast path so threshold decisions compare bit for bit.
"""
from __future__ import annotations

import math
from collections import deque

import numpy as np

from .graph import Graph
from .query import HUB, OUTLIER, Clustering, QueryParams

MAX_VERTICES = 10_000


def _closed(graph: Graph) -> list[set[int]]:
    return [set(graph.neighbors_of(v).tolist()) | {v} for v in range(graph.n)]


def _weight_maps(graph: Graph) -> list[dict[int, float]]:
    maps = []
    for v in range(graph.n):
        d = dict(zip(graph.neighbors_of(v).tolist(), graph.weights_of(v).tolist()))
        d[v] = 1.0
        maps.append(d)
    return maps


def naive_similarities(graph: Graph, measure: str) -> dict[tuple[int, int], float]:
    """sigma(u, v) for every ordered adjacent pair."""
    closed = _closed(graph)
    wmaps = _weight_maps(graph) if measure == "weighted-cosine" else None
    sims: dict[tuple[int, int], float] = {}
    for u in range(graph.n):
        for v in graph.neighbors_of(u).tolist():
            if v < u:
                continue
            shared = closed[u] & closed[v]
            if measure == "cosine":
                s = len(shared) / math.sqrt(len(closed[u]) * len(closed[v]))
            elif measure == "jaccard":
                s = len(shared) / len(closed[u] | closed[v])
            elif measure == "weighted-cosine":
                num = sum(wmaps[u][x] * wmaps[v][x] for x in sorted(shared))
                nu = math.sqrt(sum(w * w for w in wmaps[u].values()))
                nv = math.sqrt(sum(w * w for w in wmaps[v].values()))
                s = min(num / (nu * nv), 1.0)
            else:
                raise ValueError(f"unknown measure {measure!r}")
            sims[u, v] = sims[v, u] = s
    return sims


def naive_scan(graph: Graph, measure: str, params: QueryParams,
               sims: dict[tuple[int, int], float] | None = None) -> tuple[Clustering, dict[int, str]]:
    """Return (clustering, hub/outlier labels) with deterministic border assignment."""
    if graph.n > MAX_VERTICES:
        raise ValueError(f"naive_scan is limited to {MAX_VERTICES} vertices")
    if sims is None:
        sims = naive_similarities(graph, measure)
    adj = [graph.neighbors_of(v).tolist() for v in range(graph.n)]
    eps, mu = params.epsilon, params.mu

    def similar(u, v):
        return sims[u, v] >= eps

    eps_size = [1 + sum(1 for u in adj[v] if similar(u, v)) for v in range(graph.n)]
    is_core = [size >= mu for size in eps_size]

    comp = [-1] * graph.n
    components: list[list[int]] = []
    for s in range(graph.n):
        if not is_core[s] or comp[s] >= 0:
            continue
        cid = len(components)
        comp[s] = cid
        members = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if is_core[v] and comp[v] < 0 and similar(u, v):
                    comp[v] = cid
                    members.append(v)
                    queue.append(v)
        components.append(members)

    label = list(comp)
    for v in range(graph.n):
        if is_core[v]:
            continue
        best = None
        for u in adj[v]:
            if is_core[u] and similar(u, v):
                key = (-sims[u, v], u)
                if best is None or key < best:
                    best = key
        if best is not None:
            label[v] = comp[best[1]]

    groups: dict[int, list[int]] = {}
    for v, c in enumerate(label):
        if c >= 0:
            groups.setdefault(c, []).append(v)
    ordered = sorted(groups.values(), key=min)
    assignment = np.full(graph.n, -1, dtype=np.int64)
    for new_id, vs in enumerate(ordered):
        assignment[vs] = new_id

    labels = {}
    for v in range(graph.n):
        if assignment[v] < 0:
            near = {int(assignment[u]) for u in adj[v] if assignment[u] >= 0}
            labels[v] = HUB if len(near) >= 2 else OUTLIER
    return Clustering(assignment, np.array(is_core, dtype=bool)), labels
