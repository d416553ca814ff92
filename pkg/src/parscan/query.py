"""(mu, epsilon) clustering queries against a :class:`~parscan.index.ScanIndex`.

Cores are a prefix of CO[mu] and the epsilon-similar edges of a core are a
prefix of its neighbor order, so a query only reads those prefixes (found by
doubling search) plus the edges it unions.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import IO

import numpy as np

from ._parallel import map_chunks, resolve_threads
from .graph import Graph
from .index import ScanIndex
from .unionfind import ConcurrentUnionFind, UnionFind

HUB = "hub"
OUTLIER = "outlier"


@dataclass(frozen=True)
class QueryParams:
    mu: int
    epsilon: float
    deterministic_borders: bool = True

    def __post_init__(self):
        if int(self.mu) != self.mu or self.mu < 2:
            raise ValueError("mu must be an integer >= 2")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class Clustering:
    """``assignment[v]`` is a canonical cluster id or -1 for unclustered vertices.

    Canonical ids number clusters 0..C-1 by ascending smallest member.
    """

    assignment: np.ndarray
    core_flags: np.ndarray

    @property
    def n_clusters(self) -> int:
        return int(self.assignment.max()) + 1 if len(self.assignment) else 0

    def clusters(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_clusters)]
        for v in np.flatnonzero(self.assignment >= 0).tolist():
            out[self.assignment[v]].append(v)
        return out

    def cores(self) -> np.ndarray:
        return np.flatnonzero(self.core_flags)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Clustering):
            return NotImplemented
        return (np.array_equal(self.assignment, other.assignment)
                and np.array_equal(self.core_flags, other.core_flags))

    __hash__ = None  # type: ignore[assignment]


class VisitCounter:
    """Counts index entries a query reads."""

    def __init__(self):
        self.count = 0
        self._lock = threading.Lock()

    def add(self, k: int) -> None:
        with self._lock:
            self.count += k


def doubling_prefix(values: np.ndarray, start: int, end: int, eps: float,
                    counter: VisitCounter | None = None) -> int:
    """Length of the longest prefix of non-increasing ``values[start:end]`` that stays >= eps."""
    length = end - start
    probes = 0
    lo, step = 0, 1  # values[start + lo - 1] >= eps is known
    while step <= length:
        probes += 1
        if values[start + step - 1] >= eps:
            lo = step
            step *= 2
        else:
            break
    hi = min(step - 1, length)  # prefix length lies in [lo, hi]
    while lo < hi:
        mid = (lo + hi + 1) // 2
        probes += 1
        if values[start + mid - 1] >= eps:
            lo = mid
        else:
            hi = mid - 1
    if counter is not None:
        counter.add(probes)
    return lo


def get_cores(index: ScanIndex, mu: int, epsilon: float,
              counter: VisitCounter | None = None) -> np.ndarray:
    """Vertices v with |N̄(v)| >= mu and core threshold t_mu(v) >= epsilon."""
    if mu > index.max_closed_size:
        return np.empty(0, dtype=np.int64)
    s, e = int(index.co_offsets[mu]), int(index.co_offsets[mu + 1])
    j = doubling_prefix(index.co_thresholds, s, e, epsilon, counter)
    return index.co_ids[s:s + j].copy()


def similar_edges(index: ScanIndex, cores, epsilon: float, counter: VisitCounter | None = None,
                  threads: int | None = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(core, neighbor, sigma) for every epsilon-similar neighbor of every core, self excluded."""
    cores = np.asarray(cores, dtype=np.int64)
    no_offsets, no_ids, no_sims = index.no_offsets, index.no_ids, index.no_sims

    def work(lo, hi):
        us, vs, ss = [], [], []
        for u in cores[lo:hi].tolist():
            s = int(no_offsets[u]) + 1
            e = int(no_offsets[u + 1])
            j = doubling_prefix(no_sims, s, e, epsilon, counter)
            if j:
                us.append(np.full(j, u, dtype=np.int64))
                vs.append(no_ids[s:s + j])
                ss.append(no_sims[s:s + j])
        if counter is not None:
            counter.add(hi - lo + sum(len(v) for v in vs))
        return us, vs, ss

    parts = map_chunks(work, len(cores), threads)
    us = [a for p in parts for a in p[0]]
    vs = [a for p in parts for a in p[1]]
    ss = [a for p in parts for a in p[2]]
    if not us:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy(), np.empty(0, dtype=np.float64)
    return np.concatenate(us), np.concatenate(vs), np.concatenate(ss)


def canonicalize(members: np.ndarray, raw_labels: np.ndarray, n: int) -> np.ndarray:
    """Per-vertex ids 0..C-1 ordered by each cluster's smallest member; -1 elsewhere."""
    out = np.full(n, -1, dtype=np.int64)
    if not len(members):
        return out
    uniq, inv = np.unique(raw_labels, return_inverse=True)
    smallest = np.full(len(uniq), np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(smallest, inv, members)
    rank = np.empty(len(uniq), dtype=np.int64)
    rank[np.argsort(smallest, kind="stable")] = np.arange(len(uniq))
    out[members] = rank[inv]
    return out


def cluster(index: ScanIndex, params: QueryParams, *, threads: int | None = 1,
            counter: VisitCounter | None = None) -> Clustering:
    """SCAN clustering for (mu, epsilon).

    Cores joined by epsilon-similar edges share a cluster. A non-core with an
    epsilon-similar core neighbor joins one such neighbor's cluster: the most
    similar one (ties to the lower id) in deterministic mode, otherwise
    whichever claim lands first.
    """
    threads = resolve_threads(threads)
    n = index.n
    cores = get_cores(index, params.mu, params.epsilon, counter)
    su, sv, ss = similar_edges(index, cores, params.epsilon, counter, threads)
    sorted_cores = np.sort(cores)
    v_is_core = np.isin(sv, sorted_cores, assume_unique=False)

    cc_u, cc_v = su[v_is_core], sv[v_is_core]
    half = cc_u < cc_v
    cc_u, cc_v = cc_u[half].tolist(), cc_v[half].tolist()
    forest = ConcurrentUnionFind() if threads > 1 else UnionFind()

    def unite(lo, hi):
        for a, b in zip(cc_u[lo:hi], cc_v[lo:hi]):
            forest.union(a, b)

    map_chunks(unite, len(cc_u), threads)
    core_list = cores.tolist()
    root = {u: forest.find(u) for u in core_list}

    bu, bv, bs = su[~v_is_core], sv[~v_is_core], ss[~v_is_core]
    if params.deterministic_borders:
        order = np.lexsort((bu, -bs, bv))
        bv, bu = bv[order], bu[order]
        first = np.ones(len(bv), dtype=bool)
        first[1:] = bv[1:] != bv[:-1]
        border_v, border_core = bv[first].tolist(), bu[first].tolist()
    else:
        claims: dict[int, int] = {}
        claim_lock = threading.Lock()
        bu_l, bv_l = bu.tolist(), bv.tolist()

        def claim(lo, hi):
            for u, v in zip(bu_l[lo:hi], bv_l[lo:hi]):
                if v not in claims:
                    with claim_lock:
                        claims.setdefault(v, u)  # compare-and-swap from "unassigned"

        map_chunks(claim, len(bv_l), threads)
        border_v, border_core = list(claims), list(claims.values())

    members = np.array(core_list + border_v, dtype=np.int64)
    raw = np.array([root[u] for u in core_list] + [root[u] for u in border_core], dtype=np.int64)
    core_flags = np.zeros(n, dtype=bool)
    core_flags[cores] = True
    return Clustering(canonicalize(members, raw, n), core_flags)


def label_hubs_outliers(graph: Graph, clustering: Clustering) -> dict[int, str]:
    """Label each unclustered vertex: hub if its neighbors span >= 2 clusters, else outlier."""
    assign = clustering.assignment
    src, dst = graph.sources, graph.neighbors
    mask = (assign[src] < 0) & (assign[dst] >= 0)
    pairs = np.unique(np.stack([src[mask], assign[dst[mask]]]), axis=1)
    n_adjacent = np.bincount(pairs[0], minlength=graph.n)
    return {v: (HUB if n_adjacent[v] >= 2 else OUTLIER) for v in np.flatnonzero(assign < 0).tolist()}


def run_query(index: ScanIndex, params: QueryParams, *, threads: int | None = 1):
    clustering = cluster(index, params, threads=threads)
    return clustering, label_hubs_outliers(index.graph, clustering)


def write_clustering(stream: IO[str], clustering: Clustering, labels: dict[int, str],
                     mu: int, epsilon: float) -> None:
    stream.write(f"# mu={mu} epsilon={epsilon!r} clusters={clustering.n_clusters}\n")
    for v, c in enumerate(clustering.assignment.tolist()):
        stream.write(f"{v}\t{c if c >= 0 else labels.get(v, OUTLIER)}\n")


def read_clustering(stream: IO[str]) -> tuple[np.ndarray, dict[int, str], dict[str, str]]:
    """Parse a clustering file into (assignment, hub/outlier labels, header fields)."""
    header: dict[str, str] = {}
    rows: list[tuple[int, str]] = []
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    key, val = tok.split("=", 1)
                    header[key] = val
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected '<id>\\t<label>'")
        rows.append((int(parts[0]), parts[1]))
    n = max((v for v, _ in rows), default=-1) + 1
    assign = np.full(n, -1, dtype=np.int64)
    labels: dict[int, str] = {}
    for v, lab in rows:
        if lab in (HUB, OUTLIER):
            labels[v] = lab
        else:
            assign[v] = int(lab)
    return assign, labels, header
