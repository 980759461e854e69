"""Range search over a DEG, seed selection, and a budgeted path probe.

The compiled kernels take a ``visit`` scratch array and an integer ``tag``;
a vertex counts as checked during one search iff ``visit[v] == tag``. This
avoids clearing a dense bitset for every query.
"""
from dataclasses import dataclass
from heapq import heappop, heappush

import numba
import numpy as np

from .errors import EmptyGraph, EmptySeeds, UnknownSeed
from .metric import DimensionMismatch, dist, dist_to_all

TAG_LIMIT = 2**31 - 2


@numba.njit(cache=True, nogil=True)
def next_tag(visit, tagbox):
    t = tagbox[0] + 1
    if t >= TAG_LIMIT:
        visit[:] = 0
        t = 1
    tagbox[0] = t
    return t


@numba.njit(cache=True, nogil=True)
def range_search_k(feats, metric, nbrs, deg, seeds, q, k, eps, visit, tag, max_checked):
    """Returns (ids, dists, checked, hops); ids sorted by (distance, id).

    ``max_checked`` <= 0 disables the evaluation budget.
    """
    cand = [(np.float64(0.0), np.int64(0))]
    cand.pop()
    # max-heap of results keyed (-dist, -id): the root is the worst entry,
    # and among equal distances the larger id is evicted first
    res = [(np.float64(0.0), np.int64(0))]
    res.pop()
    r = np.inf
    checked = 0
    hops = 0
    for i in range(seeds.shape[0]):
        s = seeds[i]
        if visit[s] == tag:
            continue
        visit[s] = tag
        checked += 1
        ds = np.float64(dist(q, feats[s], metric))
        heappush(cand, (ds, np.int64(s)))
        heappush(res, (-ds, -np.int64(s)))
    # r stays infinite until an admitted neighbor overflows the result list,
    # even when there are more seeds than k
    limit = max_checked > 0
    stop = False
    while len(cand) > 0 and not stop:
        ds, s = heappop(cand)
        bound = r * (1.0 + eps)
        if ds > bound:
            break
        hops += 1
        for j in range(deg[s]):
            nb = nbrs[s, j]
            if visit[nb] == tag:
                continue
            if limit and checked >= max_checked:
                stop = True
                break
            visit[nb] = tag
            checked += 1
            dn = np.float64(dist(q, feats[nb], metric))
            if dn <= r * (1.0 + eps):
                heappush(cand, (dn, np.int64(nb)))
                if dn <= r:
                    heappush(res, (-dn, -np.int64(nb)))
                    if len(res) > k:
                        heappop(res)
                        r = -res[0][0]
    while len(res) > k:
        heappop(res)
    m = len(res)
    ids = np.empty(m, dtype=np.int64)
    dists = np.empty(m, dtype=np.float32)
    for i in range(m - 1, -1, -1):
        nd, nid = heappop(res)
        ids[i] = -nid
        dists[i] = -nd
    return ids, dists, checked, hops


@numba.njit(cache=True, nogil=True)
def search_batch_k(feats, metric, nbrs, deg, seeds, queries, k, eps, n_vertices, max_checked):
    nq = queries.shape[0]
    out_ids = np.full((nq, k), -1, dtype=np.int64)
    out_d = np.full((nq, k), np.inf, dtype=np.float32)
    checked = np.zeros(nq, dtype=np.int64)
    hops = np.zeros(nq, dtype=np.int64)
    visit = np.zeros(n_vertices, dtype=np.int32)
    tagbox = np.zeros(1, dtype=np.int64)
    for i in range(nq):
        tag = next_tag(visit, tagbox)
        ids, ds, c, h = range_search_k(
            feats, metric, nbrs, deg, seeds, queries[i], k, eps, visit, tag, max_checked
        )
        m = min(k, ids.shape[0])
        out_ids[i, :m] = ids[:m]
        out_d[i, :m] = ds[:m]
        checked[i] = c
        hops[i] = h
    return out_ids, out_d, checked, hops


@numba.njit(cache=True, nogil=True)
def explore_batch_k(feats, metric, nbrs, deg, query_ids, k, eps, n_vertices, max_checked):
    """Each query is an indexed vertex seeded at itself; the vertex is dropped from its result."""
    nq = query_ids.shape[0]
    out_ids = np.full((nq, k), -1, dtype=np.int64)
    out_d = np.full((nq, k), np.inf, dtype=np.float32)
    checked = np.zeros(nq, dtype=np.int64)
    hops = np.zeros(nq, dtype=np.int64)
    visit = np.zeros(n_vertices, dtype=np.int32)
    tagbox = np.zeros(1, dtype=np.int64)
    seeds = np.zeros(1, dtype=np.int64)
    for i in range(nq):
        qid = query_ids[i]
        seeds[0] = qid
        tag = next_tag(visit, tagbox)
        ids, ds, c, h = range_search_k(
            feats, metric, nbrs, deg, seeds, feats[qid], k + 1, eps, visit, tag, max_checked
        )
        m = 0
        for j in range(ids.shape[0]):
            if ids[j] == qid:
                continue
            if m == k:
                break
            out_ids[i, m] = ids[j]
            out_d[i, m] = ds[j]
            m += 1
        checked[i] = c
        hops[i] = h
    return out_ids, out_d, checked, hops


@numba.njit(cache=True, nogil=True)
def path_exists_k(feats, metric, nbrs, deg, sources, targets, budget, visit, tag):
    """Best-first walk from ``sources`` ordered by distance to the nearest target."""
    nt = targets.shape[0]
    for i in range(sources.shape[0]):
        for t in range(nt):
            if sources[i] == targets[t]:
                return True
    heap = [(np.float64(0.0), np.int64(0))]
    heap.pop()
    examined = 0
    for i in range(sources.shape[0]):
        s = sources[i]
        if visit[s] == tag:
            continue
        visit[s] = tag
        examined += 1
        best = np.inf
        for t in range(nt):
            dt = np.float64(dist(feats[s], feats[targets[t]], metric))
            if dt < best:
                best = dt
        heappush(heap, (best, np.int64(s)))
    while len(heap) > 0:
        _, s = heappop(heap)
        for j in range(deg[s]):
            nb = nbrs[s, j]
            for t in range(nt):
                if nb == targets[t]:
                    return True
            if visit[nb] == tag:
                continue
            if examined >= budget:
                return False
            visit[nb] = tag
            examined += 1
            best = np.inf
            for t in range(nt):
                dt = np.float64(dist(feats[nb], feats[targets[t]], metric))
                if dt < best:
                    best = dt
            heappush(heap, (best, np.int64(nb)))
    return False


@dataclass
class SearchResult:
    ids: np.ndarray
    distances: np.ndarray
    checked_count: int
    hop_count: int

    @property
    def entries(self):
        return list(zip(self.ids.tolist(), self.distances.tolist()))

    def __len__(self):
        return len(self.ids)


def _id_array(ids):
    if isinstance(ids, (set, frozenset)):
        ids = sorted(ids)
    return np.atleast_1d(np.asarray(ids, dtype=np.int64))


def _seed_array(graph, seeds):
    seeds = np.unique(_id_array(seeds))
    if seeds.size == 0:
        raise EmptySeeds("at least one seed vertex is required")
    if seeds.min() < 0 or seeds.max() >= graph.size:
        raise UnknownSeed(f"seed ids must lie in [0, {graph.size})")
    return seeds


def _query_vector(graph, query):
    q = np.ascontiguousarray(query, dtype=np.float32).ravel()
    if q.shape[0] != graph.store.dim:
        raise DimensionMismatch(f"query has {q.shape[0]} values, graph dim is {graph.store.dim}")
    return q


def range_search(graph, seeds, query, k, eps, max_checked=0):
    """Best-first range search from ``seeds`` toward ``query``.

    Candidates farther than ``r * (1 + eps)`` are discarded, where ``r`` is the
    current k-th best distance. ``max_checked`` optionally caps the number of
    distance evaluations; the default 0 means unlimited.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    seeds = _seed_array(graph, seeds)
    q = _query_vector(graph, query)
    visit = np.zeros(graph.size, dtype=np.int32)
    ids, ds, checked, hops = range_search_k(
        graph.store.buffer, graph.metric, graph.nbrs, graph.deg,
        seeds, q, int(k), float(eps), visit, 1, int(max_checked),
    )
    return SearchResult(ids, ds, int(checked), int(hops))


def search_batch(graph, queries, k, eps, seed=None, max_checked=0):
    """Search many queries from a single seed; returns (ids, dists, checked, hops) arrays."""
    queries = np.ascontiguousarray(queries, dtype=np.float32)
    if queries.ndim != 2 or queries.shape[1] != graph.store.dim:
        raise DimensionMismatch(f"queries must have shape (n, {graph.store.dim})")
    seeds = _seed_array(graph, [median_seed(graph) if seed is None else seed])
    return search_batch_k(
        graph.store.buffer, graph.metric, graph.nbrs, graph.deg,
        seeds, queries, int(k), float(eps), graph.size, int(max_checked),
    )


def explore_batch(graph, query_ids, k, eps, max_checked=0):
    query_ids = np.asarray(query_ids, dtype=np.int64)
    if query_ids.size and (query_ids.min() < 0 or query_ids.max() >= graph.size):
        raise UnknownSeed("query ids must be indexed vertices")
    return explore_batch_k(
        graph.store.buffer, graph.metric, graph.nbrs, graph.deg,
        query_ids, int(k), float(eps), graph.size, int(max_checked),
    )


def median_seed(graph):
    """Vertex whose feature vector is closest to the dataset centroid."""
    n = graph.size
    if n == 0:
        raise EmptyGraph("graph has no vertices")
    X = graph.store.buffer[:n]
    centroid = X.astype(np.float64).mean(axis=0).astype(np.float32)
    d = dist_to_all(centroid, X, n, graph.metric)
    return int(np.argmin(d))


def path_exists(graph, sources, target, budget):
    """True if a target is reached from ``sources`` within ``budget`` examined vertices.

    False is conservative: it may mean the budget ran out.
    """
    sources = _seed_array(graph, sources)
    targets = _id_array(target)
    if targets.size == 0:
        return False
    if targets.min() < 0 or targets.max() >= graph.size:
        raise UnknownSeed("target ids must be indexed vertices")
    visit = np.zeros(graph.size, dtype=np.int32)
    return bool(path_exists_k(
        graph.store.buffer, graph.metric, graph.nbrs, graph.deg,
        sources, targets, int(budget), visit, 1,
    ))
