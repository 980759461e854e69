import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from degindex import DEGIndex
from degindex.analysis import brute_force_knn, recall_at_k, verify_settled
from degindex.errors import DimensionMismatch


@pytest.fixture(scope="module")
def fitted(sift_small):
    base, _ = sift_small
    return DEGIndex(degree=12, k_ext=24, k_opt=12, eps=0.3, random_state=0).fit(base[:1500])


def test_params_round_trip():
    est = DEGIndex(degree=8, scheme="A", metric="angular")
    p = est.get_params()
    assert p["degree"] == 8 and p["scheme"] == "A" and p["metric"] == "angular"
    c = clone(est)
    assert c.get_params() == p
    c.set_params(degree=10)
    assert c.degree == 10 and est.degree == 8


def test_not_fitted():
    with pytest.raises(NotFittedError):
        DEGIndex().kneighbors(np.zeros((1, 4)))


def test_kneighbors_query(fitted, sift_small):
    base, Q = sift_small
    dist, ids = fitted.kneighbors(Q, n_neighbors=5)
    truth, tdist = brute_force_knn(fitted.graph_.store, Q, 5)
    assert ids.shape == (len(Q), 5)
    assert recall_at_k(ids, truth, 5) > 0.95
    assert np.all(np.diff(dist, axis=1) >= 0)
    assert np.array_equal(fitted.kneighbors(Q[:3], 5, return_distance=False), ids[:3])


def test_kneighbors_self_excluded(fitted):
    _, ids = fitted.kneighbors(n_neighbors=3)
    assert ids.shape == (1500, 3)
    assert not np.any(ids == np.arange(1500)[:, None])


def test_dimension_check(fitted):
    with pytest.raises(DimensionMismatch):
        fitted.kneighbors(np.zeros((2, 7)))
    with pytest.raises(ValueError):
        fitted.kneighbors(np.full((1, 128), np.nan))


def test_partial_fit_and_refine(sift_small):
    base, _ = sift_small
    est = DEGIndex(degree=8, k_ext=16, k_opt=8, random_state=1)
    est.partial_fit(base[:200]).partial_fit(base[200:400])
    assert est.graph_.size == 400 and verify_settled(est.graph_)
    rep = est.refine(iterations=200)
    assert rep.iterations == 200 and verify_settled(est.graph_)
    assert rep.and_after <= rep.and_before
