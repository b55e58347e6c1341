import networkx as nx
import pytest

from walktrace.expander_tools import (
    expander_witness_valid,
    hks_audit,
    hks_thresholds,
    is_rc_expander,
    largest_expansion_radius,
    pseudorandom_audit,
    rc_connectivity_premise,
    trace_expansion_audit,
)
from walktrace.graph_tools import CompleteGraph, MultiGraph
from walktrace.metadata import EnumerationBudgetError
from walktrace.random_models import SeedStream, sample_gnp, sample_gnp_alpha
from walktrace.structure_tools import vertex_connectivity
from walktrace.walk_tools import default_length, run_walk, trace_view


def test_petersen_expansion(petersen):
    # girth 5: two vertices share at most one neighbour
    assert is_rc_expander(petersen, 2, 2).passed
    cert = is_rc_expander(petersen, 3, 2)
    assert not cert.passed and cert.exact
    assert expander_witness_valid(petersen, cert.witness, 3, 2)
    assert largest_expansion_radius(petersen, 2) == 2
    assert largest_expansion_radius(petersen, 3) == 1


def test_sampled_mode_finds_weak_singletons(star, seed):
    cert = is_rc_expander(star, 3, 2, mode="sampled", samples=20, s=seed)
    assert not cert.passed and not cert.exact
    assert cert.witness == frozenset([2])


def test_complete_graph_expansion():
    K = CompleteGraph(10)
    assert is_rc_expander(K, 5, 1).passed
    cert = is_rc_expander(K, 6, 1)
    assert not cert.passed and len(cert.witness) == 6
    assert expander_witness_valid(K, cert.witness, 6, 1)


def test_rc_expander_rejections(petersen):
    with pytest.raises(ValueError):
        is_rc_expander(petersen, -1, 2)
    with pytest.raises(ValueError):
        is_rc_expander(petersen, 2, 2, mode="approximate")
    cycle = MultiGraph.from_edges(30, [(i, i % 30 + 1) for i in range(1, 31)])
    with pytest.raises(EnumerationBudgetError):
        is_rc_expander(cycle, 10, 2)


def test_connectivity_premise():
    assert rc_connectivity_premise(10, 3, 2, 2)
    assert not rc_connectivity_premise(10, 3, 1, 2)
    assert not rc_connectivity_premise(10, 1, 2, 2)


def test_expansion_premise_implies_connectivity():
    checked = 0
    for i in range(80):
        G = sample_gnp(10, 0.5 + 0.05 * (i % 6), SeedStream(53, i))
        kappa = vertex_connectivity(G)
        for c in (1, 2, 3):
            R = largest_expansion_radius(G, c)
            for k in range(1, c + 1):
                if rc_connectivity_premise(G.n, R, c, k):
                    checked += 1
                    assert kappa >= k
    assert checked > 0


def test_pseudorandom_audit_passes_on_gnp():
    s = SeedStream(59)
    G = sample_gnp_alpha(400, 10.0, s.child("model"))
    report = pseudorandom_audit(G, 10.0, samples=50, s=s)
    assert set(report.checks) == {"P1", "P2", "P3", "P4", "P5", "P6"}
    assert report["P1"].exact and report["P2"].exact
    assert report.passed, report.failed()


def test_pseudorandom_audit_fails_on_disconnected_graph(seed):
    H = nx.disjoint_union(nx.complete_graph(8), nx.complete_graph(8))
    G = MultiGraph.from_edges(16, [(u + 1, v + 1) for u, v in H.edges()])
    report = pseudorandom_audit(G, 2.0, samples=10, s=seed)
    assert not report["P1"].passed
    with pytest.raises(ValueError):
        pseudorandom_audit(MultiGraph(10), 2.0)
    with pytest.raises(ValueError):
        pseudorandom_audit(G, 0.0)


def test_trace_expansion_audit(seed):
    n = 200
    w = run_walk(CompleteGraph(n), 1, default_length(n, 3.0), "none", seed)
    report = trace_expansion_audit(trace_view(w), samples=50, s=seed)
    assert report["E1"].statistic > 0
    assert report.passed, report.failed()


def test_trace_expansion_audit_on_an_edgeless_graph(seed):
    report = trace_expansion_audit(MultiGraph(20), samples=5, s=seed)
    assert not report["E1"].passed
    assert not report["E2"].passed
    A, B = report["E2"].witness
    assert len(A) == len(B) == 8 and not A & B


def test_hks_thresholds_and_range():
    s1, s2 = hks_thresholds(10**5, 12)
    assert s1 == pytest.approx(s2 * 4130 / 12)
    with pytest.raises(ValueError):
        hks_audit(CompleteGraph(1000), 12)
    with pytest.raises(ValueError):
        hks_audit(CompleteGraph(1000), 1.0, enforce_range=False)


def test_hks_audit_on_complete_graphs():
    report = hks_audit(CompleteGraph(10**5), 12, samples=5, enforce_range=False)
    assert report["Q1"].passed and report["Q2"].passed and report["criterion"].passed
    # the small-set threshold is too large for K_1000 at d = 12
    report = hks_audit(CompleteGraph(1000), 12, samples=5, enforce_range=False)
    assert not report["Q1"].passed
    assert not report["criterion"].passed


@pytest.mark.slow
def test_expansion_premise_implies_connectivity_on_many_graphs():
    graphs = 0
    for i in range(600):
        G = sample_gnp(10, 0.5 + 0.05 * (i % 6), SeedStream(97, i))
        kappa = vertex_connectivity(G)
        premises = 0
        for c in (1, 2, 3):
            R = largest_expansion_radius(G, c)
            for k in range(1, c + 1):
                if rc_connectivity_premise(G.n, R, c, k):
                    premises += 1
                    assert kappa >= k
        graphs += premises > 0
    assert graphs >= 500
