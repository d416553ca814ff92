"""Index-based structural graph clustering (SCAN) with exact and LSH similarities."""
from .approx import ApproxConfig, approximate_all, compute_similarities_hybrid, required_samples
from .graph import Graph, GraphFormatError, degree_oriented_view, load_edge_list, write_edge_list
from .index import (IndexChecksumError, IndexFormatError, IndexTruncatedError, IndexVersionError,
                    ScanIndex, build_index, deserialize_index, load_index, save_index, serialize_index)
from .oracle import naive_scan, naive_similarities
from .quality import adjusted_rand_index, modularity, sweep
from .query import Clustering, QueryParams, cluster, label_hubs_outliers, run_query
from .similarity import SimilarityTable, compute_similarities

__all__ = [
    "ApproxConfig", "Clustering", "Graph", "GraphFormatError", "IndexChecksumError", "IndexFormatError",
    "IndexTruncatedError", "IndexVersionError", "QueryParams", "ScanIndex", "SimilarityTable",
    "adjusted_rand_index", "approximate_all", "build_index", "cluster", "compute_similarities",
    "compute_similarities_hybrid", "degree_oriented_view", "deserialize_index", "label_hubs_outliers",
    "load_edge_list", "load_index", "modularity", "naive_scan", "naive_similarities", "required_samples",
    "run_query", "save_index", "serialize_index", "sweep", "write_edge_list",
]
