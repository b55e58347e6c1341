import math

import numpy as np
import pytest

from walktrace.graph_tools import CompleteGraph, MultiGraph
from walktrace.random_models import SeedStream, sample_gnp
from walktrace.walk_tools import (
    Laziness,
    Walk,
    default_length,
    hitting_times,
    k_cover_time,
    min_degree_times,
    moves_count,
    remove_stays,
    run_walk,
    scan_hitting_times,
    simple_degree_times,
    step_edges,
    trace_view,
    visit_stats,
)


def test_laziness_parse():
    assert Laziness.parse("inverse-n") is Laziness.INVERSE_N
    assert Laziness.parse("HALF") is Laziness.HALF
    assert Laziness.INVERSE_N.stay_probability(50) == pytest.approx(0.02)
    with pytest.raises(ValueError):
        Laziness.parse("sometimes")


def test_walk_follows_edges(petersen, seed):
    w = run_walk(petersen, 1, 500, "none", seed)
    assert w.length == 500 and w.start == 1
    assert all(petersen.has_edge(int(a), int(b)) for a, b in zip(w.steps[:-1], w.steps[1:]))
    assert not w.lazy.any()


def test_walk_on_complete_graph_always_moves(seed):
    w = run_walk(CompleteGraph(50), 3, 2000, "none", seed)
    assert (w.steps[1:] != w.steps[:-1]).all()
    assert set(np.unique(w.steps)) <= set(range(1, 51))


def test_half_lazy_walk_stays_half_the_time(seed):
    w = run_walk(CompleteGraph(50), 1, 4000, "half", seed)
    assert 0.45 < w.lazy.mean() < 0.55
    assert (w.steps[1:][w.lazy] == w.steps[:-1][w.lazy]).all()
    assert not w.record_stays


def test_inverse_n_walk_records_stays(seed):
    w = run_walk(CompleteGraph(5), 1, 3000, "inverse_n", seed)
    assert w.record_stays
    assert np.array_equal(w.lazy, w.steps[1:] == w.steps[:-1])
    trace = trace_view(w)
    assert sum(trace.loops(v) for v in range(1, 6)) == int(w.lazy.sum())


def test_run_walk_rejections(seed):
    G = MultiGraph.from_edges(3, [(1, 2)])
    with pytest.raises(ValueError):
        run_walk(G, 3, 10, "none", seed)
    with pytest.raises(ValueError):
        run_walk(G, 1, -1, "none", seed)
    with pytest.raises(ValueError):
        run_walk(G, 4, 10, "none", seed)
    # a lazy walk may start on an isolated vertex and stays there
    w = run_walk(G, 3, 10, "half", seed)
    assert (w.steps == 3).all()


def test_visit_stats_on_a_short_walk():
    w = Walk(MultiGraph.from_edges(3, [(1, 2), (2, 3)]), "none", [1, 2, 3])
    stats = visit_stats(w)
    assert list(stats.mu[1:]) == [1, 1, 1]
    assert list(stats.nu[1:]) == [1, 1, 0]
    assert list(stats.first_visit_time[1:]) == [0, 1, 2]


def test_cover_times():
    w = Walk(CompleteGraph(3), "none", [1, 2, 1, 3, 1, 2, 3])
    assert k_cover_time(w, 1) == 3
    assert k_cover_time(w, 2) == 6
    assert k_cover_time(w, 3) is None
    stats = visit_stats(w, track_k=[2])
    assert list(stats.kth_visit_time[2][1:]) == [2, 5, 6]
    with pytest.raises(ValueError):
        k_cover_time(w, 0)


def test_trace_parity():
    w = Walk(CompleteGraph(3), "none", [1, 2, 3, 1])
    assert trace_view(w, parity="odd").pairs() == {(1, 2): 1, (1, 3): 1}
    assert trace_view(w, parity="even").pairs() == {(2, 3): 1}
    assert trace_view(w, 2, 3).pairs() == {(2, 3): 1, (1, 3): 1}
    idx, a, b = step_edges(w, parity="odd")
    assert list(idx) == [1, 3]
    with pytest.raises(ValueError):
        trace_view(w, parity="prime")


def test_stays_enter_the_trace_only_when_recorded():
    steps, lazy = [1, 1, 2], [True, False]
    assert trace_view(Walk(CompleteGraph(3), "half", steps, lazy, record_stays=True)).loops(1) == 1
    assert trace_view(Walk(CompleteGraph(3), "half", steps, lazy, record_stays=False)).loops(1) == 0


def test_remove_stays(seed):
    w = run_walk(CompleteGraph(20), 1, 300, "half", seed)
    r = remove_stays(w)
    assert r.length == moves_count(w)
    assert (r.steps[1:] != r.steps[:-1]).all()
    assert trace_view(r).pairs() == trace_view(w).pairs()


def test_extend_is_reproducible(seed):
    w = run_walk(CompleteGraph(30), 1, 100, "none", seed)
    a = w.extend(50)
    b = w.extend(50)
    assert np.array_equal(a.steps, b.steps)
    assert np.array_equal(a.steps[:101], w.steps)
    assert a.length == 150


def test_save_and_load(tmp_path, petersen, seed):
    w = run_walk(petersen, 2, 40, "half", seed)
    path = str(tmp_path / "walk.npz")
    w.save(path)
    v = Walk.load(path)
    assert np.array_equal(v.steps, w.steps)
    assert np.array_equal(v.lazy, w.lazy)
    assert v.base == petersen
    assert v.laziness is Laziness.HALF


def test_simple_degree_times():
    w = Walk(CompleteGraph(4), "none", [1, 2, 1, 3, 4, 2])
    times, u, v = simple_degree_times(w)
    assert list(times) == [1, 3, 4, 5]
    assert list(zip(u, v)) == [(1, 2), (1, 3), (3, 4), (2, 4)]
    assert min_degree_times(w, 2) == [4, 5]


def test_default_length():
    assert default_length(100, 0.2) == math.ceil(1.2 * 100 * math.log(100))
    assert default_length(1, 0.2) == 1


@pytest.mark.parametrize("n, run_index", [(6, 0), (6, 1), (7, 2), (8, 3)])
def test_hitting_times_match_the_step_by_step_scan(n, run_index):
    s = SeedStream(99, run_index)
    w = run_walk(CompleteGraph(n), 1, 12 * n, "none", s)
    fast = hitting_times(w, K=2, s=s)
    slow = scan_hitting_times(w, K=2, s=s)
    assert fast.cover == slow.cover
    assert fast.min_degree == slow.min_degree
    assert fast.connectivity == slow.connectivity
    assert fast.tau_H == slow.tau_H
    assert fast.tau_PM == slow.tau_PM
    assert fast.violations() == []


def test_hitting_times_on_a_random_base_graph():
    s = SeedStream(5, 0)
    G = sample_gnp(10, 0.6, s.child("model"))
    w = run_walk(G, 1, 150, "none", s)
    fast = hitting_times(w, K=1, s=s)
    slow = scan_hitting_times(w, K=1, s=s)
    assert (fast.cover, fast.min_degree, fast.connectivity, fast.tau_H, fast.tau_PM) == (
        slow.cover,
        slow.min_degree,
        slow.connectivity,
        slow.tau_H,
        slow.tau_PM,
    )


def test_deterministic_inequalities_on_complete_graphs():
    for run_index in range(5):
        s = SeedStream(3, run_index)
        w = run_walk(CompleteGraph(60), None, default_length(60, 3.0), "none", s)
        record = hitting_times(w, K=1, s=s)
        assert record.violations() == []
        assert record.tau_C(1) is not None
        assert record.tau_delta(1) >= record.tau_C(1)


@pytest.mark.slow
def test_hamiltonicity_follows_cover_on_complete_graphs():
    n, runs = 500, 30
    hits, matched = 0, 0
    for run_index in range(runs):
        s = SeedStream(2024, run_index)
        w = run_walk(CompleteGraph(n), None, default_length(n, 1.0), "none", s)
        record = hitting_times(w, K=1, s=s)
        assert record.violations() == []
        hits += record.tau_H is not None and record.tau_H == record.tau_C(1) + 1
        matched += record.tau_PM is not None and record.tau_PM == record.tau_C(1)
    assert hits / runs >= 0.9
    assert matched / runs >= 0.9
