"""The K_n construction chain: SMALL set, extended trace, sparsified expander and booster completion."""
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from walktrace import metadata
from walktrace.expander_tools import is_rc_expander
from walktrace.graph_tools import MultiGraph, VertexSet, simplify
from walktrace.hamilton_tools import booster_completion, is_hamilton_cycle
from walktrace.random_models import SeedStream
from walktrace.tail_bounds import cover_window
from walktrace.walk_tools import Walk, k_cover_time, min_degree_times, step_edges, trace_view, visit_stats


def pipeline_params(n: int, k: int = 1, delta0: float = 0.25, rho: float = 0.2) -> metadata.PipelineParams:
    """pipeline_params d_0 = floor(delta0 ln n) and the integer time marks t_- = floor, t_+ = ceil of the cover window"""
    if delta0 <= 0:
        raise ValueError(f"delta0 must be positive, got {delta0}.")
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}.")
    t_minus, t_plus = cover_window(n, k)
    d0 = int(math.floor(delta0 * math.log(n)))
    if d0 == 0:
        warnings.warn(f"d0 = floor({delta0} ln {n}) = 0, the SMALL set is empty and sparsification keeps nothing.")
    return metadata.PipelineParams(n, k, delta0, rho, d0, int(math.floor(t_minus)), int(math.ceil(t_plus)))


def small_set(trace_odd_minus: MultiGraph, d0: int) -> VertexSet:
    """Vertices of multigraph degree below d0 in the odd trace at t_-."""
    d = trace_odd_minus.degree_array()
    return frozenset(int(v) for v in np.flatnonzero(d[1:] < d0) + 1)


@dataclass
class ExtendedTrace:
    graph: MultiGraph
    # step indices of the odd-trace instances and of the instances added for SMALL
    odd_steps: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    added_steps: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    tau_cover: Optional[int] = None

    @property
    def added(self) -> int:
        return len(self.added_steps)


def extend_trace(w: Walk, small: VertexSet, k: int, params: metadata.PipelineParams) -> Optional[ExtendedTrace]:
    """extend_trace odd trace at t_- plus every step up to τ_C^k + 1 that touches SMALL

    A step belonging to both sets is counted once. Returns None when the
    walk never k-covers.
    """
    tau = k_cover_time(w, k)
    if tau is None:
        return None
    odd_idx, odd_a, odd_b = step_edges(w, 1, params.t_minus, "odd")
    idx, a, b = step_edges(w, 1, tau + 1)
    members = np.zeros(w.n + 1, dtype=bool)
    members[list(small)] = True
    touching = members[a] | members[b]
    fresh = touching & ~((idx <= params.t_minus) & (idx % 2 == 1))
    tails = np.concatenate([odd_a, a[fresh]])
    heads = np.concatenate([odd_b, b[fresh]])
    return ExtendedTrace(MultiGraph.from_arrays(w.n, tails, heads), odd_idx, idx[fresh], tau)


def sparsify(gamma_star: MultiGraph, small: VertexSet, d0: int, s: SeedStream) -> MultiGraph:
    """sparsify Γ_0: each vertex outside SMALL keeps d0 uniformly chosen incident edge instances

    SMALL vertices keep every incident instance. The union is simplified
    before it is returned.

    Parameters
    ----------
    gamma_star : MultiGraph
        the extended trace
    small : VertexSet
        the SMALL set
    d0 : int
        instances kept per vertex
    s : SeedStream
        randomness for the choice

    Returns
    -------
    MultiGraph
        simple graph Γ_0
    """
    n = gamma_star.n
    tails, heads = [], []
    incident = [[] for _ in range(n + 1)]
    for u, v, m in gamma_star.edges():
        for _ in range(m):
            incident[u].append(len(tails))
            if v != u:
                incident[v].append(len(tails))
            tails.append(u)
            heads.append(v)
    rng = s.child("sparsify").generator()
    chosen = set()
    for v in range(1, n + 1):
        if v in small:
            chosen.update(incident[v])
            continue
        if gamma_star.degree(v) < d0:
            raise ValueError(f"Vertex {v} is outside SMALL but has degree {gamma_star.degree(v)} < d0 = {d0}.")
        size = min(d0, len(incident[v]))
        if size:
            chosen.update(int(i) for i in rng.choice(incident[v], size=size, replace=False))
    keep = np.array(sorted(chosen), dtype=np.int64)
    G0 = MultiGraph.from_arrays(n, np.asarray(tails, dtype=np.int64)[keep], np.asarray(heads, dtype=np.int64)[keep])
    return simplify(G0)


def _cheap_record(w: Walk, k: int) -> metadata.HittingRecord:
    cover = [k_cover_time(w, j) for j in range(1, k + 1)]
    return metadata.HittingRecord(
        n=w.n, K=k, length=w.length, cover=cover, min_degree=min_degree_times(w, 2 * k), connectivity=[None] * (2 * k)
    )


def trace_audit(w: Walk, params: metadata.PipelineParams, record: Optional[metadata.HittingRecord] = None) -> metadata.AuditReport:
    """trace_audit multiplicity, loops at SMALL, visits, hitting inequalities and the extended-trace budgets

    Parameters
    ----------
    w : Walk
        walk on K_n, at least t_+ steps long
    params : PipelineParams
        from pipeline_params
    record : HittingRecord, optional
        full hitting times; without it only cover and degree times are compared

    Returns
    -------
    AuditReport
        one check per audited quantity
    """
    n, k = w.n, params.k
    if w.length < params.t_plus:
        warnings.warn(f"Walk of length {w.length} stops before t_+ = {params.t_plus}; audits use the shorter trace.")
    L = math.log(n)
    report = metadata.AuditReport()

    plus = trace_view(w, 1, params.t_plus)
    report.add(metadata.PropertyCheck("max_multiplicity", plus.max_multiplicity <= 4, True, plus.max_multiplicity, 4))

    minus_odd = trace_view(w, 1, params.t_minus, "odd")
    small = small_set(minus_odd, params.d0)
    bad = sorted(v for v in small if plus.loops(v) > 0 or any(m > 1 for m in plus.neighbors(v).values()))
    report.add(metadata.PropertyCheck("small_loops", not bad, True, len(bad), 0, bad[0] if bad else None))
    report.add(metadata.PropertyCheck("small_size", len(small) <= n**0.2, True, len(small), n**0.2))
    report.add(metadata.PropertyCheck("start_not_small", w.start not in small, True, None, None, w.start if w.start in small else None))

    stats = visit_stats(w, min(params.t_minus, w.length))
    ratio = stats.nu[1:].min() / L
    report.add(metadata.PropertyCheck("visits", ratio >= params.rho, True, float(ratio), params.rho, int(np.argmin(stats.nu[1:])) + 1, note="min nu(v) / ln n"))

    record = record or _cheap_record(w, k)
    violations = record.violations()
    report.add(metadata.PropertyCheck("hitting_inequalities", not violations, True, len(violations), 0, violations or None))

    tau = record.tau_C(k)
    inside = tau is not None and params.t_minus < tau < params.t_plus
    report.add(metadata.PropertyCheck("tau_C_window", inside, True, tau, None, note=f"({params.t_minus}, {params.t_plus})"))

    ext = extend_trace(w, small, k, params)
    if ext is None:
        for name in ("gamma_star_min_degree", "gamma_star_max_degree", "added_edges"):
            report.add(metadata.PropertyCheck(name, False, True, note="walk does not k-cover"))
        return report
    ds = ext.graph.simple_degree_array()[1:]
    report.add(metadata.PropertyCheck("gamma_star_min_degree", int(ds.min()) >= 2 * k, True, int(ds.min()), 2 * k))
    report.add(metadata.PropertyCheck("gamma_star_max_degree", int(ds.max()) <= 6 * L, True, int(ds.max()), 6 * L))
    report.add(metadata.PropertyCheck("added_edges", ext.added <= n**0.4, True, ext.added, n**0.4))
    return report


def run_pipeline(w: Walk, params: metadata.PipelineParams, s: Optional[SeedStream] = None, samples: int = 200) -> metadata.AuditReport:
    """run_pipeline the whole chain for one walk on K_n

    The trace audits, then Γ_0 = sparsify(Γ_*), its sampled
    (n/(2k+2), 2k)-expansion, and booster completion of Γ_0 against the odd
    trace at t_-. The completed graph must be a Hamiltonian subgraph of
    Γ_{τ_C^k+1} whose edges outside the pool stay within n^0.4.
    """
    s = s or SeedStream(w.master_seed, w.run_index)
    n, k, d0 = w.n, params.k, params.d0
    report = trace_audit(w, params)

    minus_odd = trace_view(w, 1, params.t_minus, "odd")
    small = small_set(minus_odd, d0)
    ext = extend_trace(w, small, k, params)
    if ext is None:
        report.add(metadata.PropertyCheck("completion", False, True, note="walk does not k-cover"))
        return report
    try:
        gamma0 = sparsify(ext.graph, small, d0, s)
    except ValueError as err:
        report.add(metadata.PropertyCheck("gamma0", False, True, note=str(err)))
        return report

    edges = len(gamma0.pairs())
    bound = d0 * (n - len(small)) + sum(ext.graph.degree(v) for v in small)
    note = "" if not small else f"{len(small)} SMALL vertices keep all their edges"
    report.add(metadata.PropertyCheck("gamma0_edges", edges <= bound, True, edges, bound, None, 0, note))
    delta = int(gamma0.simple_degree_array()[1:].min())
    report.add(metadata.PropertyCheck("gamma0_min_degree", delta >= 2 * k, True, delta, 2 * k))

    cert = is_rc_expander(gamma0, n // (2 * k + 2), 2 * k, "sampled", samples, s.child("expander"))
    report.add(metadata.PropertyCheck("gamma0_expander", cert.passed, cert.exact, None, None, cert.witness, cert.sets_checked))

    result = booster_completion(gamma0, minus_odd, s.child("completion"))
    valid = result.success and is_hamilton_cycle(result.graph, result.cycle)
    report.add(metadata.PropertyCheck("completion", valid, True, len(result.added), None, None, 0, f"path lengths {result.path_lengths}"))

    host = trace_view(w, 1, ext.tau_cover + 1)
    outside = [e for e in result.graph.pairs() if not host.has_edge(*e)]
    report.add(metadata.PropertyCheck("completion_subgraph", not outside, True, len(outside), 0, outside[0] if outside else None))

    foreign = max(result.foreign_edges)
    report.add(metadata.PropertyCheck("foreign_edges", foreign <= n**0.4, True, foreign, n**0.4))
    return report
