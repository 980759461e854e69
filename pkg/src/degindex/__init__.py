"""Dynamic Exploration Graph: an even-regular proximity graph for approximate nearest neighbor search."""
from .analysis import (
    average_neighbor_distance,
    brute_force_knn,
    graph_quality,
    graph_stats,
    recall_at_k,
    verify_settled,
)
from .construction import BuildParams, SelectionScheme, build, extend_graph, random_regular_graph
from .errors import DEGError
from .estimator import DEGIndex
from .graph import DegGraph, ModificationLog, new_graph
from .metric import FeatureStore
from .optimization import dynamic_edge_optimization, optimize_edge, refine_for
from .search import median_seed, range_search

__version__ = "0.1.0"

__all__ = [
    "BuildParams",
    "DEGError",
    "DEGIndex",
    "DegGraph",
    "FeatureStore",
    "ModificationLog",
    "SelectionScheme",
    "average_neighbor_distance",
    "brute_force_knn",
    "build",
    "dynamic_edge_optimization",
    "extend_graph",
    "graph_quality",
    "graph_stats",
    "median_seed",
    "new_graph",
    "optimize_edge",
    "random_regular_graph",
    "range_search",
    "recall_at_k",
    "refine_for",
    "verify_settled",
]
