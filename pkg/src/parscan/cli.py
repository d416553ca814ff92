"""Command-line front end.

    parscan build-index --input g.txt --output g.idx [--similarity jaccard] [--approx simhash --samples 256]
    parscan query --index g.idx --mu 3 --epsilon 0.6 --deterministic-borders --output clusters.tsv
    parscan sweep --index g.idx --mu-list 2 4 8 --eps-list 0.1,0.2,0.3
    parscan quality --input g.txt --clustering clusters.tsv --metric modularity
    parscan oracle-check --input g.txt --similarity cosine

Failures exit non-zero and print one JSON object ``{"error": <category>, "message": ...}``
on stderr. Categories: usage (2), io (3), input (4), index (5); a failed
oracle check exits 1.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from contextlib import contextmanager

import numpy as np

from .approx import SCHEMES, ApproxConfig, compute_similarities_hybrid
from .graph import GraphFormatError, load_edge_list
from .index import IndexFormatError, build_index, load_index, serialize_index
from .oracle import naive_scan, naive_similarities
from .quality import DEFAULT_EPSILONS, DEFAULT_MUS, adjusted_rand_index, modularity, sweep
from .query import QueryParams, read_clustering, run_query, write_clustering
from .similarity import EXACT_MEASURES, compute_similarities

EXIT_CODES = {"check": 1, "usage": 2, "io": 3, "input": 4, "index": 5}


class CliError(Exception):
    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


@contextmanager
def _open(path, mode="r"):
    if path in (None, "-"):
        yield (sys.stdout if "w" in mode else sys.stdin)
        return
    try:
        fh = open(path, mode)
    except OSError as exc:
        raise CliError("io", f"{path}: {exc.strerror}") from None
    with fh:
        yield fh


def _read_graph(path, weighted):
    with _open(path) as fh:
        try:
            return load_edge_list(fh, weighted=weighted)
        except GraphFormatError as exc:
            raise CliError("input", f"{path}: {exc}") from None


def _read_index(path):
    try:
        return load_index(path)
    except OSError as exc:
        raise CliError("io", f"{path}: {exc.strerror}") from None
    except IndexFormatError as exc:
        raise CliError("index", f"{path}: {exc}") from None


def _number_list(tokens, cast):
    out = []
    for tok in tokens:
        for piece in tok.split(","):
            if piece.strip():
                try:
                    out.append(cast(piece))
                except ValueError:
                    raise CliError("usage", f"not a number: {piece!r}") from None
    return out


def _epsilon_grid(step=0.05):
    return [round(i * step, 10) for i in range(int(round(1 / step)) + 1)]


def cmd_build_index(args) -> int:
    if args.approx == "none":
        if args.samples is not None:
            raise CliError("usage", "--samples requires --approx simhash|minhash-standard|minhash-kpartition")
    else:
        if args.samples is None or args.samples < 1:
            raise CliError("usage", "--approx needs --samples K with K >= 1")
        if args.approx == "simhash" and args.similarity == "jaccard":
            raise CliError("usage", "simhash approximates cosine similarity; use --similarity cosine")
        if args.approx != "simhash" and args.similarity != "jaccard":
            raise CliError("usage", "minhash approximates jaccard similarity; use --similarity jaccard")
        if args.approx != "simhash" and args.weighted:
            raise CliError("usage", "minhash does not support weighted graphs")
    if args.similarity == "weighted-cosine" and not args.weighted:
        raise CliError("usage", "--similarity weighted-cosine requires --weighted")

    timings = {}
    t0 = time.perf_counter()
    graph = _read_graph(args.input, args.weighted)
    timings["load"] = time.perf_counter() - t0
    config = {"similarity": args.similarity, "approx": args.approx, "weighted": bool(args.weighted)}
    t0 = time.perf_counter()
    if args.approx == "none":
        table = compute_similarities(graph, args.similarity, threads=args.threads)
    else:
        approx = ApproxConfig(args.samples, args.seed, args.approx)
        config.update(samples=args.samples, seed=args.seed, heuristic_threshold=approx.threshold)
        table = compute_similarities_hybrid(graph, approx, args.similarity, threads=args.threads)
    timings["similarity"] = time.perf_counter() - t0
    index = build_index(graph, table, config=config, threads=args.threads, timings=timings)
    data = serialize_index(index)
    with _open(args.output, "wb") as fh:
        fh.write(data)
    report = {
        "command": "build-index",
        "input": args.input,
        "output": args.output,
        "n": graph.n,
        "m": graph.m,
        "measure": table.measure,
        "max_closed_size": index.max_closed_size,
        "threads": args.threads,
        "config": config,
        "timings": timings,
    }
    print(json.dumps(report, indent=2))
    return 0


def cmd_query(args) -> int:
    index = _read_index(args.index)
    try:
        params = QueryParams(args.mu, args.epsilon, args.deterministic_borders)
    except ValueError as exc:
        raise CliError("usage", str(exc)) from None
    t0 = time.perf_counter()
    clustering, labels = run_query(index, params, threads=args.threads)
    elapsed = time.perf_counter() - t0
    with _open(args.output, "w") as fh:
        write_clustering(fh, clustering, labels, args.mu, args.epsilon)
    if args.output not in (None, "-"):
        hubs = sum(1 for v in labels.values() if v == "hub")
        print(json.dumps({"command": "query", "mu": args.mu, "epsilon": args.epsilon,
                          "clusters": clustering.n_clusters, "cores": int(clustering.core_flags.sum()),
                          "hubs": hubs, "outliers": len(labels) - hubs, "seconds": elapsed}))
    return 0


def _ground_truth(path, n):
    with _open(path) as fh:
        try:
            assign, _, _ = read_clustering(fh)
        except ValueError as exc:
            raise CliError("input", f"{path}: {exc}") from None
    if len(assign) < n:
        assign = np.concatenate([assign, np.full(n - len(assign), -1, dtype=np.int64)])
    return assign


def cmd_sweep(args) -> int:
    index = _read_index(args.index)
    mus = _number_list(args.mu_list, int) if args.mu_list else list(DEFAULT_MUS)
    eps = _number_list(args.eps_list, float) if args.eps_list else list(DEFAULT_EPSILONS)
    if any(m < 2 for m in mus) or any(not 0 <= e <= 1 for e in eps):
        raise CliError("usage", "mu values must be >= 2 and epsilon values in [0, 1]")
    truth = None
    if args.metric == "ari":
        if not args.ground_truth:
            raise CliError("usage", "--metric ari requires --ground-truth")
        truth = _ground_truth(args.ground_truth, index.n)
        if len(truth) != index.n:
            raise CliError("input", "ground truth covers a different vertex set")
    result = sweep(index, mus, eps, args.metric, truth, threads=args.threads)
    with _open(args.output, "w") as fh:
        fh.write(result.to_csv())
    return 0


def cmd_quality(args) -> int:
    with _open(args.clustering) as fh:
        try:
            assign, _, _ = read_clustering(fh)
        except ValueError as exc:
            raise CliError("input", f"{args.clustering}: {exc}") from None
    if args.metric == "modularity":
        if not args.input:
            raise CliError("usage", "--metric modularity requires --input GRAPH")
        graph = _read_graph(args.input, args.weighted)
        if len(assign) != graph.n:
            raise CliError("input", "clustering and graph disagree on vertex count")
        try:
            score = modularity(graph, assign)
        except ValueError as exc:
            raise CliError("input", str(exc)) from None
    else:
        if not args.ground_truth:
            raise CliError("usage", "--metric ari requires --ground-truth")
        truth = _ground_truth(args.ground_truth, len(assign))
        if len(truth) != len(assign):
            raise CliError("input", "clustering and ground truth cover different vertex sets")
        score = adjusted_rand_index(assign, truth)
    print(json.dumps({"command": "quality", "metric": args.metric, "score": score}))
    return 0


def oracle_check(graph, measure, mus, epsilons, threads=1):
    """Compare the index pipeline with naive SCAN on every grid point; return the first divergence."""
    index = build_index(graph, compute_similarities(graph, measure, threads=threads), threads=threads)
    sims = naive_similarities(graph, measure)
    for mu in mus:
        for eps in epsilons:
            params = QueryParams(mu, eps, True)
            got, got_labels = run_query(index, params, threads=threads)
            want, want_labels = naive_scan(graph, measure, params, sims=sims)
            for what, a, b in (("cores", got.core_flags, want.core_flags),
                               ("clusters", got.assignment, want.assignment)):
                if not np.array_equal(a, b):
                    v = int(np.flatnonzero(a != b)[0])
                    return {"mu": mu, "epsilon": eps, "field": what, "vertex": v,
                            "pipeline": a[v].item(), "oracle": b[v].item()}
            if got_labels != want_labels:
                v = min(set(got_labels.items()) ^ set(want_labels.items()))[0]
                return {"mu": mu, "epsilon": eps, "field": "labels", "vertex": v,
                        "pipeline": got_labels.get(v), "oracle": want_labels.get(v)}
    return None


def cmd_oracle_check(args) -> int:
    if args.similarity == "weighted-cosine" and not args.weighted:
        raise CliError("usage", "--similarity weighted-cosine requires --weighted")
    graph = _read_graph(args.input, args.weighted)
    if graph.n > 10_000:
        raise CliError("input", "oracle-check is limited to graphs with at most 10000 vertices")
    mus = _number_list(args.mu_list, int) if args.mu_list else list(range(2, 11))
    eps = _number_list(args.eps_list, float) if args.eps_list else _epsilon_grid()
    divergence = oracle_check(graph, args.similarity, mus, eps, args.threads)
    status = "PASS" if divergence is None else "FAIL"
    print(json.dumps({"command": "oracle-check", "status": status, "grid_points": len(mus) * len(eps),
                      "first_divergence": divergence}))
    return 0 if divergence is None else EXIT_CODES["check"]


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="parscan", description="Index-based structural graph clustering (SCAN).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common_graph(p, required=True):
        p.add_argument("--input", required=required, help="edge list: 'u v' or 'u v w' per line")
        p.add_argument("--weighted", action="store_true", help="read the third column as edge weight")

    def threads(p):
        p.add_argument("--threads", type=int, default=1, help="worker threads (0 = all cores)")

    p = sub.add_parser("build-index", help="compute similarities and build the index")
    common_graph(p)
    p.add_argument("--similarity", choices=EXACT_MEASURES, default="cosine")
    p.add_argument("--approx", choices=("none",) + SCHEMES, default="none")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    threads(p)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("query", help="cluster for one (mu, epsilon)")
    p.add_argument("--index", required=True)
    p.add_argument("--mu", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--deterministic-borders", action="store_true",
                   help="attach each border vertex to its most similar core (ties: lower id)")
    p.add_argument("--output", default="-")
    threads(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("sweep", help="score a (mu, epsilon) grid and report the argmax")
    p.add_argument("--index", required=True)
    p.add_argument("--mu-list", nargs="+")
    p.add_argument("--eps-list", nargs="+")
    p.add_argument("--metric", choices=("modularity", "ari"), default="modularity")
    p.add_argument("--ground-truth")
    p.add_argument("--output", default="-")
    threads(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("quality", help="score a clustering file")
    common_graph(p, required=False)
    p.add_argument("--clustering", required=True)
    p.add_argument("--metric", choices=("modularity", "ari"), default="modularity")
    p.add_argument("--ground-truth")
    p.set_defaults(func=cmd_quality)

    p = sub.add_parser("oracle-check", help="compare the pipeline with brute-force SCAN")
    common_graph(p)
    p.add_argument("--similarity", choices=EXACT_MEASURES, default="cosine")
    p.add_argument("--mu-list", nargs="+")
    p.add_argument("--eps-list", nargs="+")
    threads(p)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    try:
        args = make_parser().parse_args(argv)
        if getattr(args, "threads", 1) < 0:
            raise CliError("usage", "--threads must be >= 0")
        return args.func(args)
    except CliError as exc:
        print(json.dumps({"error": exc.category, "message": str(exc)}), file=sys.stderr)
        return EXIT_CODES[exc.category]


if __name__ == "__main__":
    sys.exit(main())
