"""Disjoint-set forests for grouping core vertices.

Storage is a dict keyed by element, so a forest over a handful of cores in a
large graph costs only as much as the cores themselves.
"""
from __future__ import annotations

import threading


class UnionFind:
    """Union by rank with path compression; unseen elements are singletons."""

    def __init__(self):
        self.parent: dict[int, int] = {}
        self.rank: dict[int, int] = {}

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent.get(root, root) != root:
            root = parent[root]
        while x != root:
            nxt = parent[x]
            parent[x] = root
            x = nxt
        return root

    def union(self, x: int, y: int) -> bool:
        x, y = self.find(x), self.find(y)
        if x == y:
            return False
        rx, ry = self.rank.get(x, 0), self.rank.get(y, 0)
        if rx < ry:
            x, y = y, x
        self.parent[y] = x
        if rx == ry:
            self.rank[x] = rx + 1
        return True


class ConcurrentUnionFind(UnionFind):
    """Union-find shared between worker threads.

    ``union`` is linearizable (serialized by a lock). ``find`` may run
    concurrently: compression only repoints a node at another ancestor in
    the same tree, so a racing reader still reaches the same root.
    """

    def __init__(self):
        super().__init__()
        self._lock = threading.Lock()

    def union(self, x: int, y: int) -> bool:
        with self._lock:
            return super().union(x, y)
