"""Time index construction and a query sweep on a synthetic graph at several thread counts.

    python3 scripts/perf_sanity.py --vertices 100000 --avg-degree 20 --threads 1 4
"""
import argparse
import json
import os
import time

import numpy as np

from parscan.graph import Graph
from parscan.index import build_index
from parscan.query import QueryParams, cluster
from parscan.similarity import compute_similarities


def random_graph(n, avg_degree, seed):
    rng = np.random.default_rng(seed)
    m = n * avg_degree // 2
    u = rng.integers(0, n, int(m * 1.05))
    v = rng.integers(0, n, len(u))
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    keep = lo != hi
    pairs = np.unique(np.stack([lo[keep], hi[keep]]), axis=1)
    pairs = pairs[:, rng.permutation(pairs.shape[1])[:m]]
    return Graph.from_edges(n, pairs[0], pairs[1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--vertices", type=int, default=100_000)
    ap.add_argument("--avg-degree", type=int, default=20)
    ap.add_argument("--measure", default="cosine")
    ap.add_argument("--threads", type=int, nargs="+", default=sorted({1, os.cpu_count() or 1}))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    g = random_graph(args.vertices, args.avg_degree, args.seed)
    compute_similarities(g, args.measure)  # warm the JIT cache
    runs = []
    for t in args.threads:
        timings = {}
        t0 = time.perf_counter()
        table = compute_similarities(g, args.measure, threads=t)
        timings["similarity"] = time.perf_counter() - t0
        index = build_index(g, table, threads=t, timings=timings)
        t0 = time.perf_counter()
        for eps in (0.1, 0.2, 0.3, 0.5):
            cluster(index, QueryParams(5, eps, deterministic_borders=False), threads=t)
        timings["queries"] = time.perf_counter() - t0
        timings["build_total"] = timings["similarity"] + timings["neighbor_order"] + timings["core_order"]
        runs.append({"threads": t, **{k: round(v, 4) for k, v in timings.items()}})
    base = runs[0]["build_total"]
    for r in runs:
        r["speedup"] = round(base / r["build_total"], 2)
    print(json.dumps({"n": g.n, "m": g.m, "cpu_count": os.cpu_count(), "runs": runs}, indent=2))


if __name__ == "__main__":
    main()
