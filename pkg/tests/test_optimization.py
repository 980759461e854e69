import numpy as np
import pytest

from degindex import random_regular_graph
from degindex.analysis import average_neighbor_distance, settled_report, verify_settled
from degindex.errors import MissingEdge, SearchOnlyGraph
from degindex.optimization import dynamic_edge_optimization, optimize_edge, refine_for


def sqrt_total(g):
    return sum(np.sqrt(np.float64(w)) for _, _, w in g.edges())


@pytest.fixture(scope="module")
def random8(gauss16):
    return random_regular_graph(gauss16[:400], 8, seed=2)


@pytest.mark.parametrize("gain_metric", ["raw", "sqrt"])
def test_commit_or_exact_revert(random8, gain_metric):
    g = random8.copy()
    total = g.total_weight if gain_metric == "raw" else (lambda: sqrt_total(g))
    rng = np.random.default_rng(0)
    commits = 0
    for _ in range(150):
        v1 = int(rng.integers(g.size))
        v2 = int(g.neighbor_ids(v1)[rng.integers(g.d)])
        snap = g.snapshot()
        before = total()
        out = optimize_edge(g, v1, v2, gain_metric=gain_metric)
        assert verify_settled(g)
        if out.committed:
            commits += 1
            assert out.gain > 0
            assert before - total() == pytest.approx(out.gain, rel=1e-6, abs=1e-4)
            # the log undoes the commit bit for bit
            g.revert_log(out.log)
            assert g.same_as(snap)
            g.apply_log(out.log)
            assert before - total() == pytest.approx(out.gain, rel=1e-6, abs=1e-4)
        else:
            assert g.same_as(snap)
    assert commits > 10


def test_missing_edge_and_search_only(random8):
    g = random8.copy()
    v = next(x for x in range(1, g.size) if not g.has_edge(0, x))
    with pytest.raises(MissingEdge):
        optimize_edge(g, 0, v)
    g.has_weights = False
    with pytest.raises(SearchOnlyGraph):
        optimize_edge(g, 0, int(g.neighbor_ids(0)[0]))


def test_dynamic_step_keeps_invariants(random8):
    g = random8.copy()
    rng = np.random.default_rng(3)
    w = g.total_weight()
    for _ in range(300):
        calls, commits, gain = dynamic_edge_optimization(g, rng)
        assert calls >= 1 and 0 <= commits <= calls
        rep = settled_report(g)
        assert rep.ok, rep
        new = g.total_weight()
        assert new <= w * (1 + 1e-6)
        assert w - new == pytest.approx(gain, rel=1e-5, abs=1e-3)
        w = new


def test_refine_lowers_and_and_is_deterministic(random8):
    a, b = random8.copy(), random8.copy()
    ra = refine_for(a, iterations=500, rng=5)
    rb = refine_for(b, iterations=500, rng=5)
    assert a.same_as(b.snapshot())
    assert ra.and_after < ra.and_before
    assert ra.and_before == pytest.approx(average_neighbor_distance(random8))
    assert ra.iterations == 500 and ra.commits == rb.commits


def test_refine_time_budget(random8):
    rep = refine_for(random8.copy(), seconds=0.2, rng=1)
    assert rep.iterations > 0 and rep.seconds >= 0.2


def test_refine_needs_budget(random8):
    with pytest.raises(ValueError):
        refine_for(random8.copy())


def test_refining_a_built_graph_stays_settled(deg8_copy):
    before = sqrt_total(deg8_copy)
    rep = refine_for(deg8_copy, iterations=300, rng=0, gain_metric="sqrt")
    assert verify_settled(deg8_copy)
    assert before - sqrt_total(deg8_copy) == pytest.approx(rep.gain, rel=1e-5, abs=1e-3)
