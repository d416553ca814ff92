"""Undirected simple graphs in compressed adjacency (CSR) form."""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable

import numpy as np

log = logging.getLogger(__name__)

_N_HINT = re.compile(r"^#\s*n\s*=\s*(\d+)\s*$")


class GraphFormatError(ValueError):
    """Raised for malformed edge-list input."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph.

    ``neighbors[offsets[v]:offsets[v+1]]`` is N(v) sorted ascending, and
    ``weights`` runs parallel to ``neighbors``. A position ``p`` in the flat
    arrays identifies the half-edge (u -> neighbors[p]).
    """

    n: int
    offsets: np.ndarray
    neighbors: np.ndarray
    weights: np.ndarray
    weighted: bool = False
    duplicate_edges: int = field(default=0, compare=False)

    @property
    def m(self) -> int:
        return len(self.neighbors) // 2

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    @cached_property
    def sources(self) -> np.ndarray:
        """Source vertex of every half-edge."""
        return np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)

    @cached_property
    def twins(self) -> np.ndarray:
        # CSR order is sorted by (src, dst); sorting positions by (dst, src)
        # lines every half-edge up against its reverse.
        return np.lexsort((self.sources, self.neighbors)).astype(np.int64)

    def twin(self, position: int) -> int:
        return int(self.twins[position])

    def neighbors_of(self, v: int) -> np.ndarray:
        return self.neighbors[self.offsets[v]:self.offsets[v + 1]]

    def weights_of(self, v: int) -> np.ndarray:
        return self.weights[self.offsets[v]:self.offsets[v + 1]]

    def closed_neighborhood(self, v: int) -> set[int]:
        return set(self.neighbors_of(v).tolist()) | {v}

    def edges(self) -> Iterable[tuple[int, int, float]]:
        """Yield each undirected edge once as (u, v, w) with u < v."""
        src = self.sources
        mask = src < self.neighbors
        for u, v, w in zip(src[mask].tolist(), self.neighbors[mask].tolist(),
                           self.weights[mask].tolist()):
            yield u, v, w

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and self.weighted == other.weighted
                and np.array_equal(self.offsets, other.offsets)
                and np.array_equal(self.neighbors, other.neighbors)
                and np.array_equal(self.weights, other.weights))

    __hash__ = None  # type: ignore[assignment]

    def validate(self) -> None:
        """Check every structural invariant; raise ``ValueError`` on violation."""
        if len(self.offsets) != self.n + 1 or self.offsets[0] != 0:
            raise ValueError("offsets do not match vertex count")
        if self.offsets[-1] != len(self.neighbors) or len(self.weights) != len(self.neighbors):
            raise ValueError("array lengths disagree")
        if len(self.neighbors) % 2:
            raise ValueError("odd number of half-edges")
        src, dst = self.sources, self.neighbors
        if len(dst) and (dst.min() < 0 or dst.max() >= self.n):
            raise ValueError("neighbor id out of range")
        if np.any(src == dst):
            raise ValueError("self-loop")
        same_list = src[1:] == src[:-1]
        if np.any(same_list & (dst[1:] <= dst[:-1])):
            raise ValueError("neighbor lists not strictly ascending")
        tw = self.twins
        if not (np.array_equal(src[tw], dst) and np.array_equal(dst[tw], src)):
            raise ValueError("adjacency not symmetric")
        if not np.array_equal(self.weights[tw], self.weights):
            raise ValueError("asymmetric weights")
        if np.any(~(self.weights > 0)) or not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite and > 0")

    @classmethod
    def from_edges(cls, n: int, u, v, w=None, weighted: bool = False) -> "Graph":
        """Build from undirected edge arrays that are already simple (no loops, no duplicates)."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        w = np.ones(len(u)) if w is None else np.asarray(w, dtype=np.float64)
        src = np.concatenate([u, v])
        dst = np.concatenate([v, u])
        ww = np.concatenate([w, w])
        order = np.lexsort((dst, src))
        src, dst, ww = src[order], dst[order], ww[order]
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
        return cls(n, offsets, dst, ww, weighted)


def simplify_edges(u, v, w=None, *, check_conflicts: bool = True):
    """Drop self-loops and collapse duplicate edges, keeping the first occurrence.

    Returns ``(u, v, w, n_duplicates)`` with ``u < v``. A duplicate whose
    weight differs from the kept copy raises ``GraphFormatError``.
    """
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    w = np.ones(len(u)) if w is None else np.asarray(w, dtype=np.float64)
    keep = u != v
    u, v, w = u[keep], v[keep], w[keep]
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    order = np.lexsort((np.arange(len(lo)), hi, lo))  # stable: first occurrence leads its run
    lo, hi, w = lo[order], hi[order], w[order]
    first = np.ones(len(lo), dtype=bool)
    first[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
    n_dup = int(len(lo) - first.sum())
    if n_dup and check_conflicts:
        run_start = np.maximum.accumulate(np.where(first, np.arange(len(lo)), 0))
        bad = np.flatnonzero(w != w[run_start])
        if len(bad):
            i = bad[0]
            raise GraphFormatError(
                f"duplicate edge {lo[i]} {hi[i]} with conflicting weights "
                f"{w[run_start[i]]!r} and {w[i]!r}")
    return lo[first], hi[first], w[first], n_dup


def load_edge_list(stream: IO[str], weighted: bool = False) -> Graph:
    """Parse ``u v`` / ``u v w`` lines into a :class:`Graph`.

    Lines starting with ``#`` are comments; a ``# n=<count>`` comment pins the
    vertex count so trailing isolated vertices survive a round trip. In
    unweighted mode a third column is ignored.
    """
    us: list[int] = []
    vs: list[int] = []
    ws: list[float] = []
    n_hint = 0
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            hint = _N_HINT.match(line)
            if hint:
                n_hint = max(n_hint, int(hint.group(1)))
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphFormatError(f"line {lineno}: expected 'u v' or 'u v w', got {line!r}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: vertex ids must be integers") from None
        if a < 0 or b < 0:
            raise GraphFormatError(f"line {lineno}: negative vertex id")
        wt = 1.0
        if weighted and len(parts) == 3:
            try:
                wt = float(parts[2])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: bad weight {parts[2]!r}") from None
            if not (wt > 0) or not math.isfinite(wt):
                raise GraphFormatError(f"line {lineno}: weight must be finite and > 0")
        us.append(a)
        vs.append(b)
        ws.append(wt)
    n = max(n_hint, max(us, default=-1) + 1, max(vs, default=-1) + 1)
    u, v, w, n_dup = simplify_edges(us, vs, ws, check_conflicts=weighted)
    if n_dup:
        log.warning("collapsed %d duplicate edge(s)", n_dup)
    g = Graph.from_edges(n, u, v, w, weighted=weighted)
    return Graph(g.n, g.offsets, g.neighbors, g.weights, weighted, duplicate_edges=n_dup)


def write_edge_list(graph: Graph, stream: IO[str]) -> None:
    stream.write(f"# n={graph.n}\n")
    for u, v, w in graph.edges():
        if graph.weighted:
            stream.write(f"{u} {v} {w!r}\n")
        else:
            stream.write(f"{u} {v}\n")


@dataclass(frozen=True)
class DirectedView:
    """Each undirected edge once, pointing at its higher-(degree, id) endpoint.

    ``targets[out_offsets[u]:out_offsets[u+1]]`` is sorted ascending and
    ``positions`` gives the CSR half-edge position of every (u -> target).
    """

    out_offsets: np.ndarray
    targets: np.ndarray
    positions: np.ndarray

    def edges(self) -> list[tuple[int, int]]:
        src = np.repeat(np.arange(len(self.out_offsets) - 1), np.diff(self.out_offsets))
        return list(zip(src.tolist(), self.targets.tolist()))


def degree_oriented_view(graph: Graph) -> DirectedView:
    deg = graph.degrees
    src, dst = graph.sources, graph.neighbors
    keep = (deg[src] < deg[dst]) | ((deg[src] == deg[dst]) & (src < dst))
    positions = np.flatnonzero(keep).astype(np.int64)
    out_offsets = np.zeros(graph.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src[keep], minlength=graph.n), out=out_offsets[1:])
    return DirectedView(out_offsets, dst[keep].copy(), positions)
