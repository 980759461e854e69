import networkx as nx
import numpy as np
import pytest

from degindex.analysis import brute_force_knn, recall_at_k
from degindex.errors import DimensionMismatch, EmptySeeds, UnknownSeed
from degindex.graph import DegGraph
from degindex.metric import FeatureStore
from degindex.search import (
    explore_batch,
    median_seed,
    path_exists,
    range_search,
    search_batch,
)


def numpy_ranking(X, q):
    d = ((X.astype(np.float64) - q.astype(np.float64)) ** 2).sum(axis=1).astype(np.float32)
    order = np.lexsort((np.arange(len(X)), d))
    return order, d[order]


def test_saturated_search_is_exact(deg8, gauss16):
    rng = np.random.default_rng(1)
    n = deg8.size
    for _ in range(10):
        q = rng.standard_normal(16).astype(np.float32)
        res = range_search(deg8, [0], q, k=n, eps=10.0)
        order, d = numpy_ranking(gauss16[:n], q)
        assert res.ids.tolist() == order.tolist()
        np.testing.assert_allclose(res.distances, d, rtol=1e-6)
        assert res.checked_count == n


def test_seed_is_result_and_checked(deg8):
    q = deg8.store.vectors[5]
    res = range_search(deg8, {5}, q, k=1, eps=0.0)
    assert res.entries == [(5, 0.0)]
    assert res.checked_count >= 1


def test_more_seeds_than_k_are_trimmed(deg8):
    res = range_search(deg8, range(20), deg8.store.vectors[0], k=3, eps=0.0)
    assert len(res) == 3 and res.ids[0] == 0


def test_ties_prefer_lower_id():
    # vertices 1..4 are all at distance 1 from the query
    X = np.array([[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1], [5, 5]], np.float32)
    g = DegGraph(4, FeatureStore.from_array(X))
    for _ in range(6):
        g.add_vertex()
    for u, v in [(0, 1), (0, 2), (0, 3), (0, 4), (5, 1), (5, 2), (5, 3), (5, 4)]:
        g.add_edge(u, v)
    res = range_search(g, [5], np.zeros(2, np.float32), k=3, eps=0.0)
    assert res.ids.tolist() == [0, 1, 2]


def test_argument_errors(deg8):
    q = np.zeros(16, np.float32)
    with pytest.raises(EmptySeeds):
        range_search(deg8, [], q, 5, 0.1)
    with pytest.raises(UnknownSeed):
        range_search(deg8, [deg8.size], q, 5, 0.1)
    with pytest.raises(DimensionMismatch):
        range_search(deg8, [0], np.zeros(3, np.float32), 5, 0.1)
    with pytest.raises(ValueError):
        range_search(deg8, [0], q, 0, 0.1)


def test_checked_budget(deg8):
    q = np.ones(16, np.float32)
    res = range_search(deg8, [0], q, 10, 1.0, max_checked=25)
    assert res.checked_count <= 25


def test_recall_grows_with_eps(sift_graph, sift_small):
    _, Q = sift_small
    truth, _ = brute_force_knn(sift_graph.store, Q, 10)
    recalls = []
    for eps in (0.0, 0.1, 0.3, 1.0):
        ids, _, checked, _ = search_batch(sift_graph, Q, 10, eps)
        recalls.append(recall_at_k(ids, truth, 10))
    assert recalls == sorted(recalls)
    assert recalls[-1] > 0.99


def test_batch_matches_single(deg8):
    Q = np.random.default_rng(4).standard_normal((5, 16)).astype(np.float32)
    s = median_seed(deg8)
    ids, dists, checked, hops = search_batch(deg8, Q, 7, 0.2, seed=s)
    for i, q in enumerate(Q):
        r = range_search(deg8, [s], q, 7, 0.2)
        assert ids[i].tolist() == r.ids.tolist()
        assert checked[i] == r.checked_count and hops[i] == r.hop_count


def test_explore_excludes_query(deg8):
    qids = np.arange(0, 600, 37)
    ids, _, _, _ = explore_batch(deg8, qids, 5, 0.5)
    truth, _ = brute_force_knn(deg8.store, deg8.store.vectors[qids], 5, exclude=qids)
    assert not np.any(ids == qids[:, None])
    assert recall_at_k(ids, truth, 5) > 0.95


def test_median_seed_oracle(deg8, gauss16):
    X = gauss16[: deg8.size].astype(np.float64)
    expect = np.argmin(((X - X.mean(axis=0)) ** 2).sum(axis=1))
    assert median_seed(deg8) == expect


def test_path_exists_matches_networkx():
    X = np.random.default_rng(0).standard_normal((20, 3)).astype(np.float32)
    g = DegGraph(4, FeatureStore.from_array(X))
    for _ in range(20):
        g.add_vertex()
    # two disjoint 10-cycles with chords
    nxg = nx.Graph()
    for base in (0, 10):
        for i in range(10):
            for step in (1, 2):
                u, v = base + i, base + (i + step) % 10
                if not g.has_edge(u, v):
                    g.add_edge(u, v)
                    nxg.add_edge(u, v)
    for s, t in [(0, 7), (3, 12), (11, 19), (15, 2)]:
        expect = nx.has_path(nxg, s, t)
        assert path_exists(g, [s], t, budget=20) == expect
    assert path_exists(g, [0, 10], [13], budget=20)


def _tiny(points, edges):
    X = np.asarray(points, np.float32).reshape(len(points), -1)
    g = DegGraph(4, FeatureStore.from_array(X))
    for _ in range(len(X)):
        g.add_vertex()
    for u, v in edges:
        g.add_edge(u, v)
    return g


def test_path_graph_trace():
    # hand trace: seed 0 is replaced by 1 (r = 1), then by 2 (r = 0)
    g = _tiny([0, 1, 2], [(0, 1), (1, 2)])
    res = range_search(g, [0], np.array([2], np.float32), k=1, eps=0.0)
    assert res.entries == [(2, 0.0)]
    assert res.checked_count == 3 and res.hop_count == 3


def test_median_seed_small_cases():
    assert median_seed(_tiny([4.0], [])) == 0
    assert median_seed(_tiny([-1.0, 1.0, 0.0], [])) == 2


def test_reported_distances_are_exact(deg8):
    q = np.random.default_rng(9).standard_normal(16).astype(np.float32)
    res = range_search(deg8, [0], q, 20, 0.5)
    for v, d in res.entries:
        assert d == deg8.store.distance(v, q)
