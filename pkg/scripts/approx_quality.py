"""Misclassification rates of the LSH similarities against exact ones.

For each scheme and sample count, counts edges whose side of the threshold
differs between exact and approximate similarity, split into edges inside and
outside the scheme's uncertainty band around epsilon.

    python3 scripts/approx_quality.py --delta 0.15 --trials 5
"""
import argparse
import csv
import math
import sys

import numpy as np

from parscan.approx import ApproxConfig, approximate_all, required_samples
from parscan.graph import Graph
from parscan.similarity import compute_similarities


def sbm(blocks, size, p_in, p_out, seed):
    rng = np.random.default_rng(seed)
    label = np.repeat(np.arange(blocks), size)
    iu, ju = np.triu_indices(len(label), 1)
    keep = rng.random(len(iu)) < np.where(label[iu] == label[ju], p_in, p_out)
    return Graph.from_edges(len(label), iu[keep], ju[keep])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--delta", type=float, default=0.15)
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--epsilons", type=float, nargs="+", default=[0.2, 0.5, 0.8])
    args = ap.parse_args()

    out = csv.writer(sys.stdout)
    out.writerow(["scheme", "k", "trial", "epsilon", "wrong_inside_band", "wrong_outside_band", "edges"])
    for scheme, exact_measure in (("simhash", "cosine"), ("minhash-standard", "jaccard"),
                                  ("minhash-kpartition", "jaccard")):
        for trial in range(args.trials):
            g = sbm(4, 50, 0.3, 0.02, seed=trial)
            k = required_samples(g.n, g.m, args.delta, scheme)
            exact = compute_similarities(g, exact_measure).scores
            approx = approximate_all(g, ApproxConfig(k, seed=trial, scheme=scheme)).scores
            for eps in args.epsilons:
                upper = math.sqrt(1 - eps * eps) * args.delta if scheme == "simhash" else args.delta
                inside = (exact > eps - args.delta) & (exact < eps + upper)
                wrong = (exact >= eps) != (approx >= eps)
                # each undirected edge appears twice in the half-edge table
                out.writerow([scheme, k, trial, eps, int((wrong & inside).sum()) // 2,
                              int((wrong & ~inside).sum()) // 2, g.m])


if __name__ == "__main__":
    main()
