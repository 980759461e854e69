import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degindex.errors import (
    DegreeOverflow,
    DuplicateEdge,
    InconsistentLog,
    MissingEdge,
    OddOrTinyDegree,
    SearchOnlyGraph,
    SelfLoop,
    UnknownVertex,
)
from degindex.graph import DegGraph, ModificationLog
from degindex.metric import FeatureStore


def line_graph(n=6, d=4):
    X = np.arange(n, dtype=np.float32)[:, None]
    g = DegGraph(d, FeatureStore.from_array(X))
    for _ in range(n):
        g.add_vertex()
    return g


@pytest.mark.parametrize("d", [0, 2, 3, 5, 31, 4.0])
def test_bad_degree(d):
    with pytest.raises(OddOrTinyDegree):
        DegGraph(d, FeatureStore(2))


def test_add_edge_uses_metric_weight():
    g = line_graph()
    g.add_edge(1, 4)
    assert g.weight(1, 4) == g.weight(4, 1) == 9.0
    assert g.neighbors(4) == [(1, 9.0)]
    assert g.edge_count() == 1


def test_primitive_errors():
    g = line_graph()
    with pytest.raises(SelfLoop):
        g.add_edge(2, 2)
    g.add_edge(0, 1)
    with pytest.raises(DuplicateEdge):
        g.add_edge(1, 0)
    with pytest.raises(MissingEdge):
        g.remove_edge(0, 2)
    with pytest.raises(UnknownVertex):
        g.add_edge(0, 6)
    for v in (2, 3, 4):
        g.add_edge(0, v)
    with pytest.raises(DegreeOverflow):
        g.add_edge(0, 5)
    # failed operations leave no trace
    assert g.degree(5) == 0 and g.degree(0) == 4


def test_rows_stay_sorted():
    g = line_graph()
    for v in (5, 2, 4, 1):
        g.add_edge(0, v)
    assert g.neighbor_ids(0).tolist() == [1, 2, 4, 5]
    g.remove_edge(0, 2)
    assert g.neighbor_ids(0).tolist() == [1, 4, 5]


def test_search_only_graph_rejects_mutation():
    g = line_graph()
    g.has_weights = False
    with pytest.raises(SearchOnlyGraph):
        g.add_edge(0, 1)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.integers(0, 9), st.integers(0, 9)), max_size=80))
def test_random_ops_match_set_oracle(ops):
    g = line_graph(10, 4)
    oracle = {v: set() for v in range(10)}
    for add, u, v in ops:
        if add:
            ok = u != v and v not in oracle[u] and len(oracle[u]) < 4 and len(oracle[v]) < 4
            if ok:
                g.add_edge(u, v)
                oracle[u].add(v)
                oracle[v].add(u)
            else:
                with pytest.raises((SelfLoop, DuplicateEdge, DegreeOverflow)):
                    g.add_edge(u, v)
        else:
            if v in oracle[u]:
                assert g.remove_edge(u, v) == float((u - v) ** 2)
                oracle[u].discard(v)
                oracle[v].discard(u)
            else:
                with pytest.raises(MissingEdge):
                    g.remove_edge(u, v)
    for v in range(10):
        assert g.neighbor_ids(v).tolist() == sorted(oracle[v])
    assert g.edge_count() == sum(map(len, oracle.values())) // 2


def test_log_revert_restores_bits():
    g = line_graph(8, 4)
    for u, v in [(0, 1), (1, 2), (2, 3), (3, 0)]:
        g.add_edge(u, v)
    snap = g.snapshot()
    log = ModificationLog()
    log.removed(0, 1, g.remove_edge(0, 1))
    g.add_edge(0, 5, 1.5)
    log.added(0, 5, 1.5)
    log.removed(2, 3, g.remove_edge(2, 3))
    assert not g.same_as(snap)
    after = g.snapshot()
    g.revert_log(log)
    assert g.same_as(snap)
    g.apply_log(log)
    assert g.same_as(after)


def test_revert_detects_inconsistent_log():
    g = line_graph(8, 4)
    log = ModificationLog()
    log.added(0, 1, 1.0)
    with pytest.raises(InconsistentLog):
        g.revert_log(log)


def test_copy_is_independent(deg8):
    g = deg8.copy()
    u, v, _ = next(g.edges())
    g.remove_edge(u, v)
    assert deg8.has_edge(u, v)


def test_total_weight_matches_edges(deg8):
    assert deg8.total_weight() == pytest.approx(sum(w for _, _, w in deg8.edges()), rel=1e-9)
