"""Benchmark drivers: recall versus work and time, exploration, scaling."""
import csv
import logging
import statistics
import sys
import time

import numpy as np

from .analysis import brute_force_knn, recall_at_k
from .construction import build
from .persistence import subsample
from .search import explore_batch, median_seed, search_batch

log = logging.getLogger(__name__)

EPS_LADDER = (0.0, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5)
SEARCH_COLUMNS = ("eps", "k", "recall", "qps", "mean_checked", "mean_hops", "seconds")
SCALING_COLUMNS = (
    "n", "build_time", "add_time_per_vertex", "search_time_at_recall", "eps", "recall",
    "mean_checked",
)


def _timed(fn, repeats):
    times = []
    out = None
    for _ in range(max(repeats, 1)):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, statistics.median(times)


def _row(eps, ids, truth, k, checked, hops, seconds):
    nq = len(ids)
    return {
        "eps": float(eps),
        "k": int(k),
        "recall": recall_at_k(ids, truth, k),
        "mean_checked": float(np.mean(checked)) if nq else 0.0,
        "mean_hops": float(np.mean(hops)) if nq else 0.0,
        "qps": nq / seconds if seconds > 0 else float("inf"),
        "seconds": seconds,
    }


def search_point(graph, queries, truth, k, eps, seed=None, repeats=3, max_checked=0):
    seed = median_seed(graph) if seed is None else seed
    (ids, _, checked, hops), secs = _timed(
        lambda: search_batch(graph, queries, k, eps, seed=seed, max_checked=max_checked), repeats
    )
    return _row(eps, ids, truth, k, checked, hops, secs)


def search_bench(graph, queries, truth, k=10, eps_values=EPS_LADDER, seed=None, repeats=3):
    """One row per eps: recall@k, mean checked and hop counts, median-of-repeats throughput."""
    seed = median_seed(graph) if seed is None else seed
    # one untimed call so compilation does not land in the first row
    search_batch(graph, queries[:1], k, 0.0, seed=seed)
    rows = []
    for eps in eps_values:
        rows.append(search_point(graph, queries, truth, k, eps, seed, repeats))
        log.info("search eps=%.3f recall=%.4f", eps, rows[-1]["recall"])
    return rows


def explore_bench(graph, query_ids, truth, k=100, eps_values=EPS_LADDER, repeats=3):
    """Queries are indexed vertices, each search seeded at the query itself."""
    query_ids = np.asarray(query_ids, dtype=np.int64)
    explore_batch(graph, query_ids[:1], k, 0.0)
    rows = []
    for eps in eps_values:
        (ids, _, checked, hops), secs = _timed(
            lambda: explore_batch(graph, query_ids, k, eps), repeats
        )
        rows.append(_row(eps, ids, truth, k, checked, hops, secs))
        log.info("explore eps=%.3f recall=%.4f", eps, rows[-1]["recall"])
    return rows


def brute_force_row(store, queries, k=10, repeats=3):
    """Exact scan baseline; recall is 1 by definition and every vertex is checked."""
    (ids, _), secs = _timed(lambda: brute_force_knn(store, queries, k), repeats)
    n = len(store)
    return {
        "eps": float("nan"),
        "k": int(k),
        "recall": 1.0,
        "mean_checked": float(n),
        "mean_hops": 0.0,
        "qps": len(queries) / secs if secs > 0 else float("inf"),
        "seconds": secs,
    }


def eps_for_recall(graph, queries, truth, k=10, target=0.99, seed=None, iters=12, eps_max=10.0):
    """Smallest eps (up to bisection precision) whose recall reaches ``target``.

    Returns (eps, row) or (None, row at eps_max) if the target is out of reach.
    """
    seed = median_seed(graph) if seed is None else seed
    hi = 0.1
    row = search_point(graph, queries, truth, k, hi, seed, repeats=1)
    while row["recall"] < target:
        if hi >= eps_max:
            return None, row
        hi = min(hi * 2, eps_max)
        row = search_point(graph, queries, truth, k, hi, seed, repeats=1)
    lo = 0.0
    best = hi
    for _ in range(iters):
        mid = (lo + hi) / 2
        r = search_point(graph, queries, truth, k, mid, seed, repeats=1)
        if r["recall"] >= target:
            hi = best = mid
        else:
            lo = mid
    return best, search_point(graph, queries, truth, k, best, seed, repeats=3)


def scaling_bench(base, queries, sizes, params=None, k=10, target=0.99, metric="sqeuclidean",
                  seed=0):
    """Build on random subsamples of ``base`` and time search at the target recall.

    ``search_time_at_recall`` is the mean per-query time in seconds.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes) or (sizes and sizes[-1] > len(base)):
        raise ValueError("sizes must be ascending and at most the number of base rows")
    rows = []
    for n in sizes:
        X, _ = subsample(base, n, seed)
        t0 = time.perf_counter()
        graph = build(X, params, metric=metric)
        build_s = time.perf_counter() - t0
        truth, _ = brute_force_knn(graph.store, queries, k)
        eps, row = eps_for_recall(graph, queries, truth, k, target)
        rows.append({
            "n": int(n),
            "build_time": build_s,
            "add_time_per_vertex": build_s / n,
            "search_time_at_recall": row["seconds"] / max(len(queries), 1),
            "eps": float("nan") if eps is None else eps,
            "recall": row["recall"],
            "mean_checked": row["mean_checked"],
        })
        log.info("scaling n=%d build=%.1fs eps=%s query=%.3gs", n, build_s, eps,
                 rows[-1]["search_time_at_recall"])
    return rows


def write_csv(rows, out=None, columns=None):
    """Write dict rows as CSV to the path ``out`` or to stdout."""
    if not rows:
        return
    columns = columns or list(rows[0].keys())
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: _fmt(r.get(c)) for c in columns})
    finally:
        if out:
            fh.close()


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return v
