import numpy as np
import pytest

from degindex.analysis import brute_force_knn
from degindex.bench import eps_for_recall, explore_bench, search_bench


@pytest.fixture(scope="module")
def truth(sift_graph, sift_small):
    _, Q = sift_small
    return brute_force_knn(sift_graph.store, Q, 10)[0]


def test_search_rows(sift_graph, sift_small, truth):
    _, Q = sift_small
    rows = search_bench(sift_graph, Q, truth, 10, [0.0, 0.05, 0.2, 0.5], repeats=3)
    rec = [r["recall"] for r in rows]
    assert rec == sorted(rec)
    checked = [r["mean_checked"] for r in rows]
    assert checked == sorted(checked)
    for r in rows:
        assert r["qps"] > 0 and r["k"] == 10
        assert r["qps"] * r["seconds"] / len(Q) == pytest.approx(1.0)


def test_eps_for_recall(sift_graph, sift_small, truth):
    _, Q = sift_small
    eps, row = eps_for_recall(sift_graph, Q, truth, 10, target=0.98)
    assert row["recall"] >= 0.98
    below = search_bench(sift_graph, Q, truth, 10, [eps * 0.9], repeats=1)[0]
    assert below["recall"] <= row["recall"]


def test_explore_k1(sift_graph):
    qids = np.arange(0, sift_graph.size, 30)
    X = sift_graph.store.vectors
    truth, _ = brute_force_knn(sift_graph.store, X[qids], 1, exclude=qids)
    rows = explore_bench(sift_graph, qids, truth, 1, [0.1], repeats=1)
    assert rows[0]["recall"] > 0.97
