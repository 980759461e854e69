import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial.distance import cosine, sqeuclidean

from degindex.errors import DimensionMismatch, UnknownVertex
from degindex.metric import ANGULAR, SQEUCLIDEAN, FeatureStore, dist, dist_to_all, metric_code

finite = st.floats(-1e3, 1e3, allow_nan=False, width=32)


def test_three_four_five():
    a = np.array([0, 0], np.float32)
    b = np.array([3, 4], np.float32)
    assert dist(a, b, SQEUCLIDEAN) == 25.0


def test_angular_orthogonal_and_parallel():
    e1 = np.array([1, 0, 0], np.float32)
    e2 = np.array([0, 2, 0], np.float32)
    assert dist(e1, e2, ANGULAR) == pytest.approx(1.0)
    assert dist(e1, 5 * e1, ANGULAR) == 0.0
    assert dist(e1, -e1, ANGULAR) == pytest.approx(2.0)


def test_angular_zero_vectors():
    z = np.zeros(3, np.float32)
    e = np.array([1, 0, 0], np.float32)
    assert dist(z, z, ANGULAR) == 0.0
    assert dist(z, e, ANGULAR) == 1.0


@settings(max_examples=60, deadline=None)
@given(arrays(np.float32, 12, elements=finite), arrays(np.float32, 12, elements=finite))
def test_sqeuclidean_matches_scipy(a, b):
    ref = sqeuclidean(a.astype(np.float64), b.astype(np.float64))
    assert dist(a, b, SQEUCLIDEAN) == pytest.approx(ref, rel=1e-5, abs=1e-4)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float32, 12, elements=st.floats(0.125, 10, width=32)),
       arrays(np.float32, 12, elements=st.floats(-10, 10, width=32)))
def test_angular_matches_scipy(a, b):
    if not np.any(b):
        return
    ref = max(cosine(a.astype(np.float64), b.astype(np.float64)), 0.0)
    assert dist(a, b, ANGULAR) == pytest.approx(ref, abs=1e-5)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float32, 8, elements=finite), arrays(np.float32, 8, elements=finite))
def test_symmetric_and_nonnegative(a, b):
    for m in (SQEUCLIDEAN, ANGULAR):
        assert dist(a, b, m) == dist(b, a, m)
        assert dist(a, b, m) >= 0
    assert dist(a, a, SQEUCLIDEAN) == 0


def test_dist_to_all_agrees_with_pairwise():
    X = np.random.default_rng(0).standard_normal((50, 7)).astype(np.float32)
    q = X[3]
    for m in (SQEUCLIDEAN, ANGULAR):
        d = dist_to_all(q, X, 50, m)
        assert np.array_equal(d, np.array([dist(q, x, m) for x in X], np.float32))


def test_metric_names():
    assert metric_code("l2") == metric_code("sqeuclidean") == SQEUCLIDEAN
    assert metric_code("angular") == ANGULAR
    with pytest.raises(ValueError):
        metric_code("manhattan")


def test_store_append_and_distance():
    s = FeatureStore(2, "sqeuclidean", capacity=1)
    assert s.append_vector([0, 0]) == 0
    assert s.append_vector([3, 4]) == 1
    ids = s.extend(np.ones((5, 2)))
    assert list(ids) == [2, 3, 4, 5, 6]
    assert len(s) == 7
    assert s.distance(0, 1) == 25.0
    assert s.distance(0, np.array([1.0, 1.0])) == 2.0
    with pytest.raises(DimensionMismatch):
        s.append_vector([1, 2, 3])
    with pytest.raises(UnknownVertex):
        s.distance(0, 99)


def test_store_vectors_read_only():
    s = FeatureStore.from_array(np.eye(3, dtype=np.float32))
    with pytest.raises(ValueError):
        s.vectors[0, 0] = 5
