"""Continuous edge refinement by gain-driven edge swaps.

``optimize_edge`` removes one edge and walks a short chain of swaps looking
for a configuration with a strictly smaller total edge weight that keeps the
graph regular and connected. Every change goes into a modification log so
a failed attempt is undone exactly.
"""
import time
from dataclasses import dataclass

import numba
import numpy as np

from .errors import MissingEdge, UnknownVertex
from .graph import (
    LOG_ADD,
    LOG_REMOVE,
    ModificationLog,
    add_edge_k,
    find_slot,
    remove_edge_k,
    revert_log_k,
)
from .metric import dist
from .search import next_tag, path_exists_k, range_search_k

COMMITTED = 1
REVERTED = 0
MISSING = -1


@numba.njit(cache=True, nogil=True)
def gain_term(x, gain_sqrt):
    if gain_sqrt:
        return np.sqrt(np.float64(x))
    return np.float64(x)


@numba.njit(cache=True, nogil=True)
def check_mrng_k(nbrs, wts, deg, v1, v2, d12):
    """False iff a common neighbor u has d12 > max(w(v1, u), w(v2, u)).

    Rows are sorted by id, so common neighbors are found by a merge.
    """
    i = 0
    j = 0
    n1 = deg[v1]
    n2 = deg[v2]
    while i < n1 and j < n2:
        a = nbrs[v1, i]
        b = nbrs[v2, j]
        if a < b:
            i += 1
        elif a > b:
            j += 1
        else:
            w1 = wts[v1, i]
            w2 = wts[v2, j]
            m = w1 if w1 > w2 else w2
            if d12 > m:
                return False
            i += 1
            j += 1
    return True


@numba.njit(cache=True, nogil=True)
def _log(log_op, log_u, log_v, log_w, n, op, u, v, w):
    log_op[n] = op
    log_u[n] = u
    log_v[n] = v
    log_w[n] = w
    return n + 1


@numba.njit(cache=True, nogil=True)
def optimize_edge_k(feats, metric, nbrs, wts, deg, v1, v2, i_opt, k_opt, eps_opt,
                    gain_sqrt, path_budget, visit, tagbox, log_op, log_u, log_v, log_w):
    """Returns (status, gain, log_length). Log arrays need 2 * i_opt + 4 slots."""
    if find_slot(nbrs, deg, v1, v2) < 0:
        return MISSING, 0.0, 0
    nlog = 0
    _, w12 = remove_edge_k(nbrs, wts, deg, v1, v2)
    nlog = _log(log_op, log_u, log_v, log_w, nlog, LOG_REMOVE, v1, v2, w12)
    gain = gain_term(w12, gain_sqrt)
    v3 = v1
    v4 = v1
    seeds2 = np.empty(2, dtype=np.int64)
    seeds1 = np.empty(1, dtype=np.int64)
    targets = np.empty(1, dtype=np.int64)

    for _it in range(i_opt):
        # step 2: best (s, n) with s joining v2 and edge (s, n) dropped
        if v3 == v4:
            seeds = seeds1
            seeds[0] = v3
        else:
            seeds = seeds2
            seeds[0] = v3
            seeds[1] = v4
        tag = next_tag(visit, tagbox)
        ids, ds, _, _ = range_search_k(feats, metric, nbrs, deg, seeds, feats[v2],
                                       k_opt, eps_opt, visit, tag, 0)
        best = gain
        nv3 = -1
        nv4 = -1
        nd23 = np.float32(0.0)
        for a in range(ids.shape[0]):
            s = ids[a]
            if s == v1 or s == v2 or find_slot(nbrs, deg, v2, s) >= 0:
                continue
            cost = gain - gain_term(ds[a], gain_sqrt)
            for j in range(deg[s]):
                n = nbrs[s, j]
                if n == v2:
                    continue
                c = cost + gain_term(wts[s, j], gain_sqrt)
                if best < c:
                    best = c
                    nv3 = s
                    nv4 = n
                    nd23 = ds[a]
        if nv3 < 0:
            break
        gain = best
        v3 = nv3
        v4 = nv4
        # step 3: swap (v3, v4) for (v2, v3); remove first so v3 never exceeds d
        _, w34 = remove_edge_k(nbrs, wts, deg, v3, v4)
        nlog = _log(log_op, log_u, log_v, log_w, nlog, LOG_REMOVE, v3, v4, w34)
        add_edge_k(nbrs, wts, deg, v2, v3, nd23)
        nlog = _log(log_op, log_u, log_v, log_w, nlog, LOG_ADD, v2, v3, nd23)

        if v1 == v4:
            # case a: v1 lacks two edges, split some (v5, v6) around it
            seeds = seeds2
            seeds[0] = v2
            seeds[1] = v3
            tag = next_tag(visit, tagbox)
            ids, ds, _, _ = range_search_k(feats, metric, nbrs, deg, seeds, feats[v1],
                                           k_opt, eps_opt, visit, tag, 0)
            best_a = 0.0
            v5 = -1
            v6 = -1
            d15 = np.float32(0.0)
            d16 = np.float32(0.0)
            for a in range(ids.shape[0]):
                s = ids[a]
                if s == v1 or find_slot(nbrs, deg, v1, s) >= 0:
                    continue
                base = gain - gain_term(ds[a], gain_sqrt)
                for j in range(deg[s]):
                    n = nbrs[s, j]
                    if n == v1 or find_slot(nbrs, deg, v1, n) >= 0:
                        continue
                    dn1 = dist(feats[n], feats[v1], metric)
                    c = base + gain_term(wts[s, j], gain_sqrt) - gain_term(dn1, gain_sqrt)
                    if best_a < c:
                        best_a = c
                        v5 = s
                        v6 = n
                        d15 = ds[a]
                        d16 = dn1
            if v5 >= 0:
                _, w56 = remove_edge_k(nbrs, wts, deg, v5, v6)
                nlog = _log(log_op, log_u, log_v, log_w, nlog, LOG_REMOVE, v5, v6, w56)
                add_edge_k(nbrs, wts, deg, v1, v5, d15)
                nlog = _log(log_op, log_u, log_v, log_w, nlog, LOG_ADD, v1, v5, d15)
                add_edge_k(nbrs, wts, deg, v1, v6, d16)
                nlog = _log(log_op, log_u, log_v, log_w, nlog, LOG_ADD, v1, v6, d16)
                return COMMITTED, best_a, nlog
        elif find_slot(nbrs, deg, v1, v4) < 0:
            # case b: close the chain with (v1, v4) if that keeps the gain and
            # the component holding v2, v3 still reaches v1 or v4
            d14 = dist(feats[v1], feats[v4], metric)
            final = gain - gain_term(d14, gain_sqrt)
            if final > 0.0:
                seeds = seeds2
                seeds[0] = v2
                seeds[1] = v3
                targets[0] = v1
                tag = next_tag(visit, tagbox)
                found = path_exists_k(feats, metric, nbrs, deg, seeds, targets,
                                      path_budget, visit, tag)
                if not found:
                    targets[0] = v4
                    tag = next_tag(visit, tagbox)
                    found = path_exists_k(feats, metric, nbrs, deg, seeds, targets,
                                          path_budget, visit, tag)
                if found:
                    add_edge_k(nbrs, wts, deg, v1, v4, d14)
                    nlog = _log(log_op, log_u, log_v, log_w, nlog, LOG_ADD, v1, v4, d14)
                    return COMMITTED, final, nlog

        # step 5: the dangling vertex becomes the next edge end to place
        v = v4
        v4 = v3
        v3 = v2
        v2 = v

    revert_log_k(nbrs, wts, deg, log_op, log_u, log_v, log_w, nlog)
    return REVERTED, 0.0, nlog


@numba.njit(cache=True, nogil=True)
def dynamic_edge_optimization_k(feats, metric, nbrs, wts, deg, v1, i_opt, k_opt, eps_opt,
                                gain_sqrt, path_budget, visit, tagbox,
                                log_op, log_u, log_v, log_w):
    """Returns (optimize calls, commits, total committed gain)."""
    k0 = deg[v1]
    first = nbrs[v1, :k0].copy()
    calls = 0
    commits = 0
    total = 0.0
    for i in range(k0):
        v2 = first[i]
        j = find_slot(nbrs, deg, v1, v2)
        if j < 0:
            continue
        if not check_mrng_k(nbrs, wts, deg, v1, v2, wts[v1, j]):
            status, g, _ = optimize_edge_k(feats, metric, nbrs, wts, deg, v1, v2, i_opt, k_opt,
                                           eps_opt, gain_sqrt, path_budget, visit, tagbox,
                                           log_op, log_u, log_v, log_w)
            calls += 1
            if status == COMMITTED:
                commits += 1
                total += g
    # longest remaining edge, lowest id on ties
    if deg[v1] > 0:
        jbest = 0
        for j in range(1, deg[v1]):
            if wts[v1, j] > wts[v1, jbest]:
                jbest = j
        status, g, _ = optimize_edge_k(feats, metric, nbrs, wts, deg, v1, nbrs[v1, jbest], i_opt,
                                       k_opt, eps_opt, gain_sqrt, path_budget, visit, tagbox,
                                       log_op, log_u, log_v, log_w)
        calls += 1
        if status == COMMITTED:
            commits += 1
            total += g
    return calls, commits, total


# --- python surface ------------------------------------------------------------


@dataclass
class OptimizeOutcome:
    committed: bool
    gain: float
    log: ModificationLog


@dataclass
class RefinementReport:
    iterations: int
    optimize_calls: int
    commits: int
    gain: float
    and_before: float
    and_after: float
    seconds: float


class Scratch:
    """Reusable per-graph buffers for the kernels (visit tags and a log)."""

    def __init__(self, capacity, i_opt):
        self.visit = np.zeros(max(capacity, 1), dtype=np.int32)
        self.tagbox = np.zeros(1, dtype=np.int64)
        self.resize_log(i_opt)

    def resize_log(self, i_opt):
        n = 2 * int(i_opt) + 4
        self.log_op = np.zeros(n, dtype=np.int8)
        self.log_u = np.zeros(n, dtype=np.int32)
        self.log_v = np.zeros(n, dtype=np.int32)
        self.log_w = np.zeros(n, dtype=np.float32)

    def fit(self, capacity, i_opt):
        if self.visit.shape[0] < capacity:
            self.visit = np.zeros(2 * capacity, dtype=np.int32)
            self.tagbox[0] = 0
        if self.log_op.shape[0] < 2 * i_opt + 4:
            self.resize_log(i_opt)
        return self


def _gain_flag(gain_metric):
    if gain_metric not in ("raw", "sqrt"):
        raise ValueError("gain_metric must be 'raw' or 'sqrt'")
    return gain_metric == "sqrt"


def default_path_budget(k_opt, i_opt):
    return int(k_opt) * int(i_opt)


def optimize_edge(graph, v1, v2, i_opt=5, k_opt=30, eps_opt=0.001, gain_metric="raw",
                  path_budget=None, scratch=None):
    """Try to replace edge (v1, v2) by a cheaper configuration.

    Returns an OptimizeOutcome. On a revert the graph is restored exactly.
    """
    graph.require_mutable()
    for v in (v1, v2):
        if not 0 <= v < graph.size:
            raise UnknownVertex(f"vertex {v} not in graph")
    if path_budget is None:
        path_budget = default_path_budget(k_opt, i_opt)
    scratch = (scratch or Scratch(graph.size, i_opt)).fit(graph.size, i_opt)
    status, gain, nlog = optimize_edge_k(
        graph.store.buffer, graph.metric, graph.nbrs, graph.wts, graph.deg,
        int(v1), int(v2), int(i_opt), int(k_opt), float(eps_opt), _gain_flag(gain_metric),
        int(path_budget), scratch.visit, scratch.tagbox,
        scratch.log_op, scratch.log_u, scratch.log_v, scratch.log_w,
    )
    if status == MISSING:
        raise MissingEdge(f"edge ({v1}, {v2}) not present")
    log = ModificationLog.from_arrays(scratch.log_op, scratch.log_u, scratch.log_v,
                                      scratch.log_w, nlog)
    return OptimizeOutcome(status == COMMITTED, float(gain), log)


def dynamic_edge_optimization(graph, rng, i_opt=5, k_opt=30, eps_opt=0.001, gain_metric="raw",
                              path_budget=None, scratch=None):
    """One refinement step on a uniformly drawn vertex.

    Returns (optimize calls, commits, committed gain).
    """
    graph.require_mutable()
    if graph.size == 0:
        return 0, 0, 0.0
    if path_budget is None:
        path_budget = default_path_budget(k_opt, i_opt)
    scratch = (scratch or Scratch(graph.size, i_opt)).fit(graph.size, i_opt)
    v1 = int(rng.integers(graph.size))
    calls, commits, gain = dynamic_edge_optimization_k(
        graph.store.buffer, graph.metric, graph.nbrs, graph.wts, graph.deg,
        v1, int(i_opt), int(k_opt), float(eps_opt), _gain_flag(gain_metric), int(path_budget),
        scratch.visit, scratch.tagbox,
        scratch.log_op, scratch.log_u, scratch.log_v, scratch.log_w,
    )
    return int(calls), int(commits), float(gain)


def refine_for(graph, iterations=None, seconds=None, rng=None, i_opt=5, k_opt=30, eps_opt=0.001,
               gain_metric="raw", path_budget=None, callback=None):
    """Run refinement steps until the iteration or wall-clock budget is spent.

    ``rng`` may be a seed or a ``numpy.random.Generator``; passing the same
    generator to consecutive calls continues one random stream.
    """
    from .analysis import average_neighbor_distance

    if iterations is None and seconds is None:
        raise ValueError("give an iteration or a time budget")
    rng = np.random.default_rng(rng)
    scratch = Scratch(graph.size, i_opt)
    and_before = average_neighbor_distance(graph) if graph.size else 0.0
    it = calls = commits = 0
    gain = 0.0
    t0 = time.perf_counter()
    while True:
        if iterations is not None and it >= iterations:
            break
        if seconds is not None and time.perf_counter() - t0 >= seconds:
            break
        c, m, g = dynamic_edge_optimization(graph, rng, i_opt, k_opt, eps_opt, gain_metric,
                                            path_budget, scratch)
        it += 1
        calls += c
        commits += m
        gain += g
        if callback is not None:
            callback(it, graph)
    and_after = average_neighbor_distance(graph) if graph.size else 0.0
    return RefinementReport(it, calls, commits, gain, and_before, and_after,
                            time.perf_counter() - t0)
