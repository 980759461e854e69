"""Ground truth, quality metrics, graph statistics and structural verifiers."""
import io
import itertools
from dataclasses import dataclass, field
from math import comb

import numba
import numpy as np

from .errors import (
    DegenerateSubset,
    DimensionMismatch,
    EmptySubset,
    KTooLarge,
    TooLargeToEnumerate,
    UnknownVertex,
)
from .metric import dist_to_all
from .search import median_seed


# --- ground truth ---------------------------------------------------------


@numba.njit(cache=True, nogil=True)
def _knn_k(queries, feats, n, k, metric, exclude):
    nq = queries.shape[0]
    ids = np.empty((nq, k), dtype=np.int64)
    ds = np.empty((nq, k), dtype=np.float32)
    for i in range(nq):
        d = dist_to_all(queries[i], feats, n, metric)
        order = np.argsort(d, kind="mergesort")  # stable: ties go to the lower id
        m = 0
        for j in range(n):
            o = order[j]
            if o == exclude[i]:
                continue
            ids[i, m] = o
            ds[i, m] = d[o]
            m += 1
            if m == k:
                break
    return ids, ds


def brute_force_knn(store, queries, k, exclude=None):
    """Exact k nearest stored rows per query, as (ids, dists).

    ``exclude`` optionally names one stored id per query to leave out, which
    is how self-matches are dropped for indexed queries.
    """
    queries = np.ascontiguousarray(np.atleast_2d(queries), dtype=np.float32)
    n = len(store)
    avail = n if exclude is None else n - 1
    if k > avail:
        raise KTooLarge(f"k={k} exceeds the {avail} available vectors")
    if queries.shape[1] != store.dim:
        raise DimensionMismatch(f"queries have dim {queries.shape[1]}, store dim is {store.dim}")
    if exclude is None:
        exclude = np.full(len(queries), -1, dtype=np.int64)
    exclude = np.asarray(exclude, dtype=np.int64)
    return _knn_k(queries, store.buffer, n, int(k), store.metric, exclude)


def vertex_knn(store, k, ids=None):
    """k nearest other vertices of each stored vertex (or of ``ids``)."""
    ids = np.arange(len(store)) if ids is None else np.asarray(ids, dtype=np.int64)
    return brute_force_knn(store, store.buffer[ids], k, exclude=ids)


def recall_at_k(results, truth, k):
    """Mean fraction of each query's true top-k found among its first k results."""
    results = [list(r)[:k] for r in results]
    truth = [list(t)[:k] for t in truth]
    if len(results) != len(truth):
        raise ValueError("results and truth must cover the same queries")
    if not results:
        return 0.0
    hits = 0
    for r, t in zip(results, truth):
        if len(t) < k:
            raise ValueError("each truth row needs at least k entries")
        hits += len(set(r) & set(t))
    return hits / (k * len(results))


# --- graph metrics --------------------------------------------------------


def graph_quality(graph, knn=None, ids=None):
    """Mean fraction of each vertex's neighbors that are among its d true nearest neighbors.

    ``knn`` may supply the precomputed neighbor rows for ``ids`` (default: all
    vertices); otherwise they are computed by exhaustive scan.
    """
    ids = np.arange(graph.size) if ids is None else np.asarray(ids, dtype=np.int64)
    if knn is None:
        knn, _ = vertex_knn(graph.store, graph.d, ids)
    total = 0.0
    for row, v in enumerate(ids):
        nb = graph.nbrs[v, : graph.deg[v]]
        if len(nb) == 0:
            continue
        total += len(np.intersect1d(nb, knn[row][: len(nb)])) / len(nb)
    return total / len(ids) if len(ids) else 0.0


def average_neighbor_distance(graph, subset=None):
    """Mean over vertices of the mean weight of their edges, read from stored weights."""
    if subset is None:
        subset = np.arange(graph.size)
    subset = np.asarray(list(subset) if isinstance(subset, (set, frozenset)) else subset, dtype=np.int64)
    if subset.size == 0:
        raise EmptySubset("subset must not be empty")
    if subset.min() < 0 or subset.max() >= graph.size:
        raise UnknownVertex("subset contains unknown vertices")
    mask = np.arange(graph.d)[None, :] < graph.deg[subset, None]
    w = np.where(mask, graph.wts[subset].astype(np.float64), 0.0)
    return float((w.sum(axis=1) / graph.d).mean())


# --- reachability and structure ---------------------------------------------


@numba.njit(cache=True, nogil=True)
def bfs_count(nbrs, deg, n, src):
    seen = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int64)
    seen[src] = 1
    queue[0] = src
    head = 0
    tail = 1
    while head < tail:
        v = queue[head]
        head += 1
        for j in range(deg[v]):
            u = nbrs[v, j]
            if not seen[u]:
                seen[u] = 1
                queue[tail] = u
                tail += 1
    return tail


@numba.njit(cache=True, nogil=True)
def _bridge_count(nbrs, deg, n):
    """Bridges reachable from vertex 0 (iterative lowlink), plus the visited count."""
    disc = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    it = np.zeros(n, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    sp = 0
    stack[0] = 0
    disc[0] = 0
    low[0] = 0
    timer = 1
    bridges = 0
    while sp >= 0:
        v = stack[sp]
        if it[v] < deg[v]:
            u = nbrs[v, it[v]]
            it[v] += 1
            if disc[u] == -1:
                parent[u] = v
                disc[u] = timer
                low[u] = timer
                timer += 1
                sp += 1
                stack[sp] = u
            elif u != parent[v]:
                if disc[u] < low[v]:
                    low[v] = disc[u]
        else:
            sp -= 1
            if sp >= 0:
                p = stack[sp]
                if low[v] < low[p]:
                    low[p] = low[v]
                if low[v] > disc[p]:
                    bridges += 1
    return bridges, timer


@numba.njit(cache=True, nogil=True)
def _structure_k(nbrs, wts, deg, n, d, check_weights):
    """Bit flags: 1 irregular, 2 unsorted/duplicate, 4 self-loop, 8 asymmetric, 16 weight mismatch."""
    flags = 0
    for v in range(n):
        if deg[v] != d:
            flags |= 1
        for j in range(deg[v]):
            u = nbrs[v, j]
            if j > 0 and nbrs[v, j - 1] >= u:
                flags |= 2
            if u == v:
                flags |= 4
                continue
            if u < 0 or u >= n:
                flags |= 8
                continue
            # linear scan so unsorted rows are still judged correctly
            found = -1
            for i in range(deg[u]):
                if nbrs[u, i] == v:
                    found = i
                    break
            if found < 0:
                flags |= 8
            elif check_weights and wts[u, found] != wts[v, j]:
                flags |= 16
    return flags


@dataclass
class SettledReport:
    regular: bool
    sorted_unique: bool
    loop_free: bool
    symmetric: bool
    weights_symmetric: bool
    connected: bool
    bridges: int

    @property
    def ok(self):
        return (self.regular and self.sorted_unique and self.loop_free and self.symmetric
                and self.weights_symmetric and self.connected and self.bridges == 0)


def settled_report(graph):
    n = graph.size
    flags = _structure_k(graph.nbrs, graph.wts, graph.deg, n, graph.d, graph.has_weights)
    if n == 0:
        connected, bridges = True, 0
    elif flags & (4 | 8):
        # traversal needs a well-formed undirected adjacency
        connected, bridges = False, -1
    else:
        bridges, reached = _bridge_count(graph.nbrs, graph.deg, n)
        connected = int(reached) == n
    return SettledReport(
        regular=not flags & 1,
        sorted_unique=not flags & 2,
        loop_free=not flags & 4,
        symmetric=not flags & 8,
        weights_symmetric=not flags & 16,
        connected=connected,
        bridges=int(bridges),
    )


def verify_settled(graph):
    """Regular, symmetric, loop-free, connected and bridgeless."""
    return settled_report(graph).ok


def is_connected(graph):
    return graph.size == 0 or bfs_count(graph.nbrs, graph.deg, graph.size, 0) == graph.size


# --- statistics ------------------------------------------------------------------


@dataclass
class GraphStats:
    graph_quality: float
    avg_degree: float
    min_out: int
    max_out: int
    min_in: int
    max_in: int
    source_count: int
    search_reach: float
    explore_reach: float
    meta: dict = field(default_factory=dict, repr=False)

    COLUMNS = ("graph_quality", "avg_degree", "min_out", "max_out", "min_in", "max_in",
               "source_count", "search_reach", "explore_reach")

    def as_row(self):
        return {c: getattr(self, c) for c in self.COLUMNS}

    def to_csv(self):
        row = self.as_row()
        buf = io.StringIO()
        buf.write(",".join(self.COLUMNS) + "\n")
        buf.write(",".join(_fmt(c, row[c]) for c in self.COLUMNS) + "\n")
        return buf.getvalue()

    def to_text(self):
        row = self.as_row()
        width = max(len(c) for c in self.COLUMNS)
        return "\n".join(f"{c:<{width}}  {_fmt(c, row[c])}" for c in self.COLUMNS) + "\n"


def _fmt(col, val):
    if col.endswith("reach"):
        return f"{100.0 * val:.2f}"
    if isinstance(val, float):
        return f"{val:.4f}" if col == "graph_quality" else f"{val:.1f}"
    return str(val)


def graph_stats(graph, explore_sample=100, gq_sample=1000, exact_below=1000, rng=0):
    """Out/in degree extremes, sources, reachability and graph quality.

    Reachability from every vertex is exact up to ``exact_below`` vertices and
    estimated from ``explore_sample`` random sources beyond. Graph quality is
    exact up to 20k vertices and estimated on ``gq_sample`` vertices beyond.
    """
    n = graph.size
    rng = np.random.default_rng(rng)
    out_deg = graph.deg[:n]
    slots = np.arange(graph.d)[None, :] < out_deg[:, None]
    in_deg = np.bincount(graph.nbrs[:n][slots], minlength=n)[:n]
    seed = median_seed(graph)
    search_reach = bfs_count(graph.nbrs, graph.deg, n, seed) / n
    if n <= exact_below:
        sources = np.arange(n)
    else:
        sources = rng.choice(n, size=explore_sample, replace=False)
    explore_reach = float(np.mean([bfs_count(graph.nbrs, graph.deg, n, s) / n for s in sources]))
    if n <= 20000:
        gq = graph_quality(graph)
    else:
        gq = graph_quality(graph, ids=np.sort(rng.choice(n, size=gq_sample, replace=False)))
    return GraphStats(
        graph_quality=float(gq),
        avg_degree=float(out_deg.mean()) if n else 0.0,
        min_out=int(out_deg.min()) if n else 0,
        max_out=int(out_deg.max()) if n else 0,
        min_in=int(in_deg.min()) if n else 0,
        max_in=int(in_deg.max()) if n else 0,
        source_count=int((in_deg == 0).sum()),
        search_reach=float(search_reach),
        explore_reach=explore_reach,
        meta={"vertices": n, "degree": graph.d, "seed": seed},
    )


# --- cut sets ---------------------------------------------------------------


def _subset(graph, S):
    S = np.unique(np.asarray(list(S), dtype=np.int64))
    if S.size == 0 or S.size >= graph.size:
        raise DegenerateSubset("subset must be non-empty and proper")
    if S.min() < 0 or S.max() >= graph.size:
        raise UnknownVertex("subset contains unknown vertices")
    return S


def cut_set_size(graph, S):
    """Number of edges with exactly one endpoint in S (direct count)."""
    S = _subset(graph, S)
    inside = np.zeros(graph.size, dtype=bool)
    inside[S] = True
    crossing = 0
    for v in S:
        nb = graph.nbrs[v, : graph.deg[v]]
        crossing += int((~inside[nb]).sum())
    return crossing


def induced_edge_count(graph, S):
    S = _subset(graph, S)
    inside = np.zeros(graph.size, dtype=bool)
    inside[S] = True
    count = 0
    for v in S:
        nb = graph.nbrs[v, : graph.deg[v]]
        count += int(inside[nb].sum())
    return count // 2


def cut_set_formula(graph, S):
    """Cut size of a d-regular graph from the induced edge count: 2 * (|S| d / 2 - |L|)."""
    S = _subset(graph, S)
    return 2 * (len(S) * graph.d // 2 - induced_edge_count(graph, S))


def cut_lower_bound(size, d):
    return size * (d + 1) - size * size


@dataclass
class CutBoundReport:
    subsets_checked: int
    violations: list

    @property
    def ok(self):
        return not self.violations


def verify_cut_bound(graph, max_subsets=2_000_000):
    """Check every subset S with |S| <= d against the cut-set lower bound.

    For each such S the cut must hold at least |S|(d + 1) - |S|^2 >= d edges.
    """
    n, d = graph.size, graph.d
    top = min(d, n - 1)
    total = sum(comb(n, s) for s in range(1, top + 1))
    if total > max_subsets:
        raise TooLargeToEnumerate(f"{total} subsets exceed the limit of {max_subsets}")
    adj = np.zeros((n, n), dtype=np.int64)
    for v in range(n):
        adj[v, graph.nbrs[v, : graph.deg[v]]] = 1
    violations = []
    checked = 0
    for size in range(1, top + 1):
        bound = cut_lower_bound(size, d)
        for S in itertools.combinations(range(n), size):
            idx = np.array(S)
            internal = int(adj[np.ix_(idx, idx)].sum()) // 2
            cut = int(graph.deg[idx].sum()) - 2 * internal
            checked += 1
            if cut < bound or cut < d:
                violations.append((S, cut, bound))
    return CutBoundReport(checked, violations)
