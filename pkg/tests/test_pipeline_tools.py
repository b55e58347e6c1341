import math

import numpy as np
import pytest

from walktrace.graph_tools import CompleteGraph, MultiGraph, simplify
from walktrace.metadata import PipelineParams
from walktrace.pipeline_tools import extend_trace, pipeline_params, run_pipeline, small_set, sparsify, trace_audit
from walktrace.random_models import SeedStream
from walktrace.walk_tools import Walk, default_length, run_walk, trace_view


def test_pipeline_params():
    params = pipeline_params(300)
    assert params.d0 == 1
    assert params.t_minus < 300 * math.log(300) < params.t_plus
    assert isinstance(params.t_minus, int) and isinstance(params.t_plus, int)
    assert pipeline_params(300, delta0=1.5).d0 == 8
    with pytest.raises(ValueError):
        pipeline_params(300, delta0=0)
    with pytest.warns(UserWarning):
        pipeline_params(64, delta0=0.1)


def test_small_set():
    G = MultiGraph.from_edges(4, [(1, 2), (1, 3)])
    assert small_set(G, 2) == {2, 3, 4}
    assert small_set(G, 0) == frozenset()
    # a loop counts twice
    assert small_set(MultiGraph.from_edges(2, [(1, 1)]), 2) == {2}


def test_extend_trace():
    params = PipelineParams(n=4, k=1, d0=1, t_minus=3, t_plus=8)
    w = Walk(CompleteGraph(4), "none", [1, 2, 3, 4, 1, 3])
    ext = extend_trace(w, frozenset(), 1, params)
    assert ext.tau_cover == 3
    assert ext.graph.pairs() == {(1, 2): 1, (3, 4): 1}
    assert ext.added == 0
    ext = extend_trace(w, frozenset([1]), 1, params)
    assert ext.graph.pairs() == {(1, 2): 1, (3, 4): 1, (1, 4): 1}
    assert list(ext.odd_steps) == [1, 3]
    assert list(ext.added_steps) == [4]
    assert extend_trace(Walk(CompleteGraph(4), "none", [1, 2, 1]), frozenset(), 1, params) is None


def test_sparsify_keeps_everything_when_d0_reaches_the_degrees(cycle6, seed):
    assert sparsify(cycle6, frozenset(), 2, seed) == cycle6
    doubled = MultiGraph.from_edges(3, [(1, 2), (1, 2), (2, 3)])
    assert sparsify(doubled, frozenset([1, 2, 3]), 1, seed) == simplify(doubled)


def test_sparsify_bounds_the_edge_count(petersen, seed):
    G0 = sparsify(petersen, frozenset(), 1, seed)
    assert len(G0.pairs()) <= 10
    assert set(G0.pairs()) <= set(petersen.pairs())
    assert G0.simple_degree_array()[1:].min() >= 1


def test_sparsify_rejects_low_degree_outside_small(cycle6, seed):
    with pytest.raises(ValueError):
        sparsify(cycle6, frozenset(), 3, seed)


def test_trace_audit_on_a_single_step():
    w = Walk(CompleteGraph(20), "none", [1, 2])
    with pytest.warns(UserWarning):
        params = pipeline_params(20)
        report = trace_audit(w, params)
    assert report["max_multiplicity"].passed
    assert report["max_multiplicity"].statistic == 1
    assert not report["tau_C_window"].passed
    assert not report["added_edges"].passed


def test_small_loops_sees_recorded_stays():
    params = PipelineParams(n=4, k=1, d0=1, t_minus=3, t_plus=8)
    # odd steps up to t_- only touch 1 and 2, so SMALL = {3, 4}; step 5 is a stay at 3
    steps = [1, 2, 1, 2, 3, 3, 4, 1, 2]
    lazy = [False, False, False, False, True, False, False, False]
    w = Walk(CompleteGraph(4), "inverse_n", steps, lazy)
    assert w.record_stays
    report = trace_audit(w, params)
    assert not report["small_loops"].passed
    assert report["small_loops"].witness == 3
    assert report["max_multiplicity"].statistic == 4

    w = Walk(CompleteGraph(4), "inverse_n", steps, lazy, record_stays=False)
    assert trace_audit(w, params)["small_loops"].passed


def test_run_pipeline_reports_every_stage():
    n = 64
    params = pipeline_params(n)
    w = run_walk(CompleteGraph(n), None, 1000, "inverse_n", SeedStream(71))
    report = run_pipeline(w, params, samples=50)
    expected = {
        "max_multiplicity",
        "small_loops",
        "small_size",
        "start_not_small",
        "visits",
        "hitting_inequalities",
        "tau_C_window",
        "gamma_star_min_degree",
        "gamma_star_max_degree",
        "added_edges",
        "gamma0_edges",
        "gamma0_min_degree",
        "gamma0_expander",
        "completion",
        "completion_subgraph",
        "foreign_edges",
    }
    assert set(report.checks) == expected
    assert report["gamma0_edges"].passed
    assert report["hitting_inequalities"].passed
    assert report["max_multiplicity"].statistic == trace_view(w, 1, params.t_plus).max_multiplicity
    assert not report["gamma0_expander"].exact
    assert report["tau_C_window"].note == f"({params.t_minus}, {params.t_plus})"
    assert report["tau_C_window"].samples == 0
    assert report["visits"].note == "min nu(v) / ln n"


@pytest.mark.slow
def test_multiplicities_stay_small_on_large_complete_graphs():
    n = 2000
    params = pipeline_params(n)
    for run_index in range(5):
        w = run_walk(CompleteGraph(n), None, params.t_plus, "inverse_n", SeedStream(73, run_index))
        report = trace_audit(w, params)
        assert report["max_multiplicity"].passed
        assert np.isfinite(report["visits"].statistic)


@pytest.mark.slow
def test_pipeline_completes_to_a_hamiltonian_subgraph():
    # delta0 = 0.25 gives d0 = 1 at n = 300, so Γ_0 keeps degree-1 vertices and cannot expand;
    # with d0 = 3 it is close to a random 3-out graph, which expands at this size
    n = 300
    params = pipeline_params(n, delta0=0.7)
    assert params.d0 == 3
    completed = 0
    for run_index in range(10):
        s = SeedStream(79, run_index)
        w = run_walk(CompleteGraph(n), None, default_length(n, 1.5), "inverse_n", s)
        report = run_pipeline(w, params, s.child("pipeline"), samples=50)
        assert report["gamma0_edges"].passed
        if not report["completion"].passed:
            continue
        completed += 1
        # the odd trace at t_- lies inside Γ_{τ_C+1} only when τ_C comes after t_-
        if report["tau_C_window"].passed:
            assert report["completion_subgraph"].passed
    assert completed >= 8
