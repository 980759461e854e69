"""Incremental construction of a DEG.

A new vertex ``v`` enters by repeatedly picking a close vertex ``b`` from a
range search, dropping one edge ``(b, n)`` and connecting both ``b`` and
``n`` to ``v``. Each step keeps every other vertex at degree ``d`` and keeps
``b`` and ``n`` connected through ``v``.
"""
import enum
from dataclasses import dataclass

import numba
import numpy as np

from .errors import (
    DatasetTooSmall,
    GraphTooSmall,
    InfeasibleDegreeSequence,
    NoEligibleNeighbor,
    UnknownVertex,
)
from .graph import DegGraph, add_edge_k, check_degree, find_slot, remove_edge_k
from .metric import FeatureStore, dist
from .optimization import (
    Scratch,
    _gain_flag,
    check_mrng_k,
    default_path_budget,
    gain_term,
    optimize_edge_k,
)
from .search import next_tag, range_search_k

SCHEME_A = 0  # neighbor closest to the new vertex
SCHEME_B = 1  # shortest edge of b
SCHEME_C = 2  # longest edge of b
SCHEME_D = 3  # largest drop in total edge weight


class SelectionScheme(enum.Enum):
    A = SCHEME_A
    B = SCHEME_B
    C = SCHEME_C
    D = SCHEME_D

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls[str(value).upper()]
        except KeyError:
            raise ValueError(f"unknown selection scheme {value!r}, expected A, B, C or D") from None


@dataclass
class BuildParams:
    """Construction and refinement settings, defaulting to values tuned for 128-d SIFT-like data."""

    d: int = 30
    k_ext: int = 60
    eps_ext: float = 0.2
    k_opt: int = 30
    eps_opt: float = 0.001
    i_opt: int = 5
    scheme: SelectionScheme = SelectionScheme.C
    use_mrng: bool = True
    optimize_new_edges: bool = True
    gain_metric: str = "raw"
    path_budget: int = None

    def __post_init__(self):
        self.d = check_degree(self.d)
        self.scheme = SelectionScheme.parse(self.scheme)
        if self.k_ext < self.d:
            raise ValueError(f"k_ext ({self.k_ext}) must be at least d ({self.d})")
        if self.eps_ext < 0 or self.eps_opt < 0:
            raise ValueError("search range factors must be non-negative")
        if self.k_opt < 1:
            raise ValueError("k_opt must be >= 1")
        if self.i_opt < 1:
            raise ValueError("i_opt must be >= 1")
        _gain_flag(self.gain_metric)
        if self.path_budget is None:
            self.path_budget = default_path_budget(self.k_opt, self.i_opt)


@dataclass
class ExtendInfo:
    used_fallback: bool  # the MRNG-free pass was needed
    widened: int  # how often the candidate pool was doubled
    optimized: int  # optimize_edge calls on the new edges
    committed: int


# --- kernels ----------------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def select_edge_k(feats, metric, nbrs, wts, deg, b, v, scheme, gain_sqrt):
    """Slot index in b's row of the neighbor to detach, or -1 if none is eligible."""
    best_j = -1
    best = 0.0
    for j in range(deg[b]):
        n = nbrs[b, j]
        if n == v or find_slot(nbrs, deg, v, n) >= 0:
            continue
        if scheme == SCHEME_A:
            key = -np.float64(dist(feats[n], feats[v], metric))
        elif scheme == SCHEME_B:
            key = -np.float64(wts[b, j])
        elif scheme == SCHEME_C:
            key = np.float64(wts[b, j])
        else:
            # delta(v, b) is the same for every n and left out of the comparison
            key = gain_term(wts[b, j], gain_sqrt) - gain_term(dist(feats[v], feats[n], metric), gain_sqrt)
        if best_j < 0 or key > best:
            best = key
            best_j = j
    return best_j


@numba.njit(cache=True, nogil=True)
def extend_k(feats, metric, nbrs, wts, deg, v, n_vertices, seed, k_ext, eps_ext, scheme,
             use_mrng, optimize_new, i_opt, k_opt, eps_opt, gain_sqrt, path_budget,
             visit, tagbox, log_op, log_u, log_v, log_w):
    """Connect the isolated vertex ``v`` with ``d`` edges.

    Returns (ok, used_fallback, widened, optimize calls, commits).
    """
    d = nbrs.shape[1]
    q = feats[v]
    seeds = np.empty(1, dtype=np.int64)
    seeds[0] = seed
    k = k_ext
    tag = next_tag(visit, tagbox)
    ids, ds, _, _ = range_search_k(feats, metric, nbrs, deg, seeds, q, k, eps_ext, visit, tag, 0)
    first_ids = ids
    skip = not use_mrng
    used_fallback = False
    widened = 0
    while deg[v] < d:
        for a in range(ids.shape[0]):
            if deg[v] >= d:
                break
            b = ids[a]
            if b == v or find_slot(nbrs, deg, v, b) >= 0:
                continue
            if not skip and not check_mrng_k(nbrs, wts, deg, v, b, ds[a]):
                continue
            j = select_edge_k(feats, metric, nbrs, wts, deg, b, v, scheme, gain_sqrt)
            if j < 0:
                continue
            n = nbrs[b, j]
            remove_edge_k(nbrs, wts, deg, b, n)
            add_edge_k(nbrs, wts, deg, v, b, ds[a])
            add_edge_k(nbrs, wts, deg, v, n, dist(q, feats[n], metric))
        if deg[v] >= d:
            break
        if not skip:
            skip = True
            used_fallback = True
            continue
        # both passes exhausted this pool
        if k >= n_vertices:
            return False, used_fallback, widened, 0, 0
        k = min(2 * k, n_vertices)
        widened += 1
        tag = next_tag(visit, tagbox)
        ids, ds, _, _ = range_search_k(feats, metric, nbrs, deg, seeds, q, k, eps_ext, visit, tag, 0)

    calls = 0
    commits = 0
    if optimize_new:
        new_nbrs = nbrs[v, :d].copy()
        for i in range(d):
            u = new_nbrs[i]
            in_result = False
            for a in range(first_ids.shape[0]):
                if first_ids[a] == u:
                    in_result = True
                    break
            if in_result or find_slot(nbrs, deg, v, u) < 0:
                continue
            status, _, _ = optimize_edge_k(feats, metric, nbrs, wts, deg, v, u, i_opt, k_opt,
                                           eps_opt, gain_sqrt, path_budget, visit, tagbox,
                                           log_op, log_u, log_v, log_w)
            calls += 1
            if status == 1:
                commits += 1
    return True, used_fallback, widened, calls, commits


# --- python surface -----------------------------------------------------------


def check_mrng(graph, v1, v2):
    """True unless a common neighbor of v1 and v2 lies in their lune.

    The lune test: some common neighbor u with d(v1, v2) > max(w(v1, u), w(v2, u)).
    """
    for v in (v1, v2):
        if not 0 <= v < graph.size:
            raise UnknownVertex(f"vertex {v} not in graph")
    if v1 == v2:
        raise ValueError("check_mrng needs two distinct vertices")
    d12 = np.float32(graph.store.distance(int(v1), int(v2)))
    return bool(check_mrng_k(graph.nbrs, graph.wts, graph.deg, v1, v2, d12))


def select_edge_to_break(graph, b, v, scheme=SelectionScheme.C, gain_metric="raw"):
    """Neighbor ``n`` of ``b`` whose edge (b, n) the new vertex ``v`` should take over.

    Neighbors already adjacent to ``v`` (and ``v`` itself) are not eligible.
    """
    scheme = SelectionScheme.parse(scheme)
    j = select_edge_k(graph.store.buffer, graph.metric, graph.nbrs, graph.wts, graph.deg,
                      int(b), int(v), scheme.value, _gain_flag(gain_metric))
    if j < 0:
        raise NoEligibleNeighbor(f"vertex {b} has no neighbor eligible for {v}")
    return int(graph.nbrs[b, j])


def complete_graph(graph):
    """Connect the first d + 1 registered vertices pairwise."""
    d = graph.d
    for u in range(d + 1):
        for w in range(u + 1, d + 1):
            graph.add_edge(u, w)


def extend_graph(graph, v, params, scratch=None, seed_vertex=0):
    """Insert vertex ``v`` (the next stored row) into a settled graph."""
    graph.require_mutable()
    if graph.size < graph.d + 1 or not graph.is_settled():
        raise GraphTooSmall(f"extension needs a settled graph with at least {graph.d + 1} vertices")
    if v != graph.size or v >= len(graph.store):
        raise UnknownVertex(f"vertex {v} is not the next unregistered row of the store")
    if params.d != graph.d:
        raise ValueError(f"params.d={params.d} does not match graph degree {graph.d}")
    return _extend(graph, v, params, scratch, seed_vertex)


def _extend(graph, v, params, scratch, seed_vertex):
    graph.add_vertex()
    scratch = (scratch or Scratch(len(graph.store), params.i_opt)).fit(graph.nbrs.shape[0], params.i_opt)
    ok, fallback, widened, calls, commits = extend_k(
        graph.store.buffer, graph.metric, graph.nbrs, graph.wts, graph.deg,
        int(v), int(v) + 1, int(seed_vertex), int(params.k_ext), float(params.eps_ext),
        params.scheme.value, bool(params.use_mrng), bool(params.optimize_new_edges),
        int(params.i_opt), int(params.k_opt), float(params.eps_opt),
        _gain_flag(params.gain_metric), int(params.path_budget),
        scratch.visit, scratch.tagbox,
        scratch.log_op, scratch.log_u, scratch.log_v, scratch.log_w,
    )
    if not ok:
        raise NoEligibleNeighbor(f"could not find {graph.d} neighbors for vertex {v}")
    return ExtendInfo(bool(fallback), int(widened), int(calls), int(commits))


def insert(graph, X, params, callback=None):
    """Append the rows of ``X`` to the store and insert them one by one."""
    graph.require_mutable()
    if graph.size < graph.d + 1 or not graph.is_settled():
        raise GraphTooSmall(f"extension needs a settled graph with at least {graph.d + 1} vertices")
    if graph.size != len(graph.store):
        raise UnknownVertex("store holds rows that are not in the graph")
    ids = graph.store.extend(X)
    graph.reserve(len(graph.store))
    scratch = Scratch(len(graph.store), params.i_opt)
    for v in ids:
        info = _extend(graph, int(v), params, scratch, 0)
        if callback is not None:
            callback(graph, int(v), info)
    return ids


def build(X, params=None, metric="sqeuclidean", callback=None):
    """Build a DEG over the rows of ``X`` in order.

    ``callback(graph, v, info)`` runs after each insertion beyond the initial
    complete graph (``info`` is None for those first d + 1 vertices).
    """
    params = params or BuildParams()
    store = X if isinstance(X, FeatureStore) else FeatureStore.from_array(X, metric)
    n = len(store)
    if n < params.d + 1:
        raise DatasetTooSmall(f"need at least d + 1 = {params.d + 1} vectors, got {n}")
    graph = DegGraph(params.d, store, capacity=n)
    for _ in range(params.d + 1):
        graph.add_vertex()
    complete_graph(graph)
    if callback is not None:
        callback(graph, params.d, None)
    scratch = Scratch(n, params.i_opt)
    for v in range(params.d + 1, n):
        info = _extend(graph, v, params, scratch, 0)
        if callback is not None:
            callback(graph, v, info)
    return graph


def random_regular_graph(X, d, seed=0, metric="sqeuclidean", max_tries=100):
    """Connected d-regular graph with uniformly random edges, weighted by the metric."""
    import networkx as nx

    d = check_degree(d)
    store = X if isinstance(X, FeatureStore) else FeatureStore.from_array(X, metric)
    n = len(store)
    if n < d + 1 or (n * d) % 2:
        raise InfeasibleDegreeSequence(f"no simple {d}-regular graph on {n} vertices")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        g = nx.random_regular_graph(d, n, seed=int(rng.integers(2**31)))
        if nx.is_connected(g):
            break
    else:
        raise InfeasibleDegreeSequence("failed to draw a connected regular graph")
    graph = DegGraph(d, store, capacity=n)
    for _ in range(n):
        graph.add_vertex()
    for u, v in sorted((min(a, b), max(a, b)) for a, b in g.edges()):
        graph.add_edge(u, v)
    return graph
