import math
from itertools import combinations
from typing import Iterator, Optional, Tuple

import numpy as np
from scipy import special

from walktrace import metadata
from walktrace.graph_tools import CompleteGraph, Graph, VertexSet, ball, bfs_grown_set, external_neighborhood, neighbor_sphere
from walktrace.random_models import SeedStream
from walktrace.structure_tools import is_connected

ENUMERATION_BUDGET = 2_000_000


def _adjacency_bits(G: Graph):
    adj = [0] * (G.n + 1)
    for v in range(1, G.n + 1):
        for u in G.neighbors(v):
            adj[v] |= 1 << u
    return adj


def _neighbourhood_size(adj, U) -> int:
    ubits = 0
    nb = 0
    for u in U:
        ubits |= 1 << u
        nb |= adj[u]
    return bin(nb & ~ubits).count("1")


class _SetSampler:
    """Alternates uniform random vertex sets with BFS-grown connected ones (filled up uniformly if the component is small)."""

    def __init__(self, G: Graph, rng: np.random.Generator):
        self.G = G
        self.rng = rng
        self.vertices = np.arange(1, G.n + 1)
        self.count = 0

    def sample(self, size: int, exclude: VertexSet = frozenset()) -> VertexSet:
        self.count += 1
        pool = self.vertices if not exclude else np.array([v for v in self.vertices if v not in exclude])
        size = min(size, len(pool))
        if self.count % 2 == 1 or exclude:
            return frozenset(int(v) for v in self.rng.choice(pool, size=size, replace=False))
        S = set(bfs_grown_set(self.G, int(self.rng.choice(pool)), size, self.rng))
        if len(S) < size:
            rest = np.array([v for v in pool if v not in S])
            S.update(int(v) for v in self.rng.choice(rest, size=size - len(S), replace=False))
        return frozenset(S)


def _counts(G: Graph, S: VertexSet) -> np.ndarray:
    """counts[v] = |E(v, S)| with multiplicity, slot 0 unused (scipy sparse product)."""
    n = G.n
    if isinstance(G, CompleteGraph):
        counts = np.full(n + 1, len(S), dtype=np.int64)
        counts[list(S)] -= 1
        counts[0] = 0
        return counts
    x = np.zeros(n)
    x[[v - 1 for v in S]] = 1.0
    out = np.zeros(n + 1, dtype=np.int64)
    out[1:] = np.rint(G.adjacency_matrix() @ x).astype(np.int64)
    return out


def _members(n: int, S: VertexSet) -> np.ndarray:
    mask = np.zeros(n + 1, dtype=bool)
    mask[list(S)] = True
    return mask


def expander_witness_valid(G: Graph, U: VertexSet, R: int, c: float) -> bool:
    """A failing witness U must satisfy 1 <= |U| <= R and |N(U)| < c|U|."""
    return 1 <= len(U) <= R and len(external_neighborhood(G, U)) < c * len(U)


def is_rc_expander(
    G: Graph,
    R: int,
    c: float,
    mode: str = "exact",
    samples: int = 1000,
    s: Optional[SeedStream] = None,
    budget: int = ENUMERATION_BUDGET,
) -> metadata.ExpanderCert:
    """is_rc_expander does every vertex set U with |U| <= R satisfy |N(U)| >= c|U|

    Parameters
    ----------
    G : Graph
        the graph
    R : int
        size cap
    c : float
        expansion factor
    mode : str
        ``exact`` enumerates every set (rejected when more than ``budget``
        sets would be needed); ``sampled`` checks all singletons and then
        uniform and BFS-grown sets of each size, so a pass is one-sided
    samples : int
        sets drawn in sampled mode, spread over the sizes 2..R
    s : SeedStream, optional
        randomness for sampled mode
    budget : int
        enumeration budget for exact mode

    Returns
    -------
    ExpanderCert
        verdict, and a violating set when failing
    """
    if R < 0 or c < 0:
        raise ValueError(f"R and c must be non-negative, got R = {R}, c = {c}.")
    if mode not in ("exact", "sampled"):
        raise ValueError(f"mode must be 'exact' or 'sampled', got '{mode}'.")
    n = G.n
    R = min(R, n)
    cert = metadata.ExpanderCert(R, c, mode, True, None, 0)
    if isinstance(G, CompleteGraph):
        cert.mode = "exact"
        for size in range(1, R + 1):
            cert.sets_checked += 1
            if n - size < c * size:
                cert.passed, cert.witness = False, frozenset(range(1, size + 1))
                break
        return cert

    adj = _adjacency_bits(G)
    if mode == "exact":
        total = sum(special.comb(n, j, exact=True) for j in range(1, R + 1))
        if total > budget:
            raise metadata.EnumerationBudgetError(f"Exact (R,c) certification needs {total} sets, budget is {budget}.")
        for size in range(1, R + 1):
            for U in combinations(range(1, n + 1), size):
                cert.sets_checked += 1
                if _neighbourhood_size(adj, U) < c * size:
                    cert.passed, cert.witness = False, frozenset(U)
                    return cert
        return cert

    for v in range(1, n + 1):
        cert.sets_checked += 1
        if _neighbourhood_size(adj, (v,)) < c:
            cert.passed, cert.witness = False, frozenset([v])
            return cert
    if R < 2:
        return cert
    sampler = _SetSampler(G, (s or SeedStream()).child("rc-expander").generator())
    per_size = max(1, samples // (R - 1))
    for size in range(2, R + 1):
        for _ in range(per_size):
            U = sampler.sample(size)
            cert.sets_checked += 1
            if _neighbourhood_size(adj, U) < c * len(U):
                cert.passed, cert.witness = False, U
                return cert
    return cert


def rc_connectivity_premise(n: int, R: int, c: float, k: int) -> bool:
    """c >= k and R(c+1) >= (n+k)/2: an (R,c)-expander on n vertices is then k-vertex-connected."""
    return c >= k and R * (c + 1) >= 0.5 * (n + k)


def largest_expansion_radius(G: Graph, c: float, budget: int = ENUMERATION_BUDGET) -> int:
    """Largest R for which G is an exact (R,c)-expander."""
    n = G.n
    adj = _adjacency_bits(G)
    spent = 0
    for size in range(1, n + 1):
        spent += special.comb(n, size, exact=True)
        if spent > budget:
            raise metadata.EnumerationBudgetError(f"Exact expansion radius needs more than {budget} sets.")
        if any(_neighbourhood_size(adj, U) < c * size for U in combinations(range(1, n + 1), size)):
            return size - 1
    return n


def _sizes(lo: int, hi: int, count: int, rng: np.random.Generator) -> Iterator[int]:
    if hi < lo:
        return
    for _ in range(count):
        yield int(rng.integers(lo, hi + 1))


def pseudorandom_audit(G: Graph, alpha: float, samples: int = 1000, s: Optional[SeedStream] = None, K: float = 100) -> metadata.AuditReport:
    """pseudorandom_audit connectivity, degree concentration, boundary, expansion, spread

    P1 and P2 are checked exactly; P3, P4 and P5 on sampled sets (a pass
    means no violation was found); P6 on sampled roots with full balls, and
    only when α < ln² n.

    Parameters
    ----------
    G : Graph
        graph, typically G(n,p) with p = α ln n / n
    alpha : float
        the density parameter α
    samples : int
        sets (or roots) per sampled property
    s : SeedStream, optional
        randomness for the samples
    K : float
        the constant of the expansion property

    Returns
    -------
    AuditReport
        checks P1..P6
    """
    n = G.n
    if n < 16:
        raise ValueError(f"The pseudo-randomness audit needs n >= 16, got n = {n}.")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}.")
    s = s or SeedStream()
    rng = s.child("pseudorandom").generator()
    sampler = _SetSampler(G, rng)
    L = math.log(n)
    LL = math.log(L)
    aL = alpha * L
    report = metadata.AuditReport()

    report.add(metadata.PropertyCheck("P1", is_connected(G), True))

    d = G.degree_array()[1:]
    dev = np.abs(d - aL)
    worst = int(np.argmax(dev)) + 1
    tol = 2 * math.sqrt(alpha) * L
    report.add(metadata.PropertyCheck("P2", bool(dev.max() <= tol), True, float(dev.max()), tol, None if dev.max() <= tol else worst))

    check = report.add(metadata.PropertyCheck("P3", True, False, 0.0, None, None, 0))
    for size in _sizes(1, int(0.8 * n), samples, rng):
        S = sampler.sample(size)
        inside = _members(n, S)
        boundary = int(_counts(G, S)[1:][~inside[1:]].sum())
        need = len(S) * (n - len(S)) * aL / (2 * n)
        check.samples += 1
        check.statistic = max(check.statistic, need / boundary if boundary else math.inf)
        if boundary <= need:
            check.passed, check.witness = False, S
            break
    check.threshold = 1.0

    check = report.add(metadata.PropertyCheck("P4", True, False, 0.0, 1.0, None, 0, f"K = {K}"))
    small_cut = math.ceil(n / aL)
    for size in _sizes(1, int(n / L), samples, rng):
        A = sampler.sample(size)
        a = len(A)
        counts = _counts(G, A)
        outside = ~_members(n, A)
        outside[0] = False
        if a >= small_cut:
            heavy = outside & (counts >= K * a * aL / n)
            limit = a * aL / K
        else:
            heavy = outside & (counts >= K)
            limit = a * aL / math.log(K)
        e = int(counts[heavy].sum())
        check.samples += 1
        check.statistic = max(check.statistic, e / limit)
        if e > limit:
            check.passed, check.witness = False, A
            break

    size = min(n, max(1, round(n * LL**1.5 / L)))
    check = report.add(metadata.PropertyCheck("P5", True, False, 0.0, size / 2, None, 0))
    for _ in range(samples):
        A = sampler.sample(size)
        counts = _counts(G, A)
        outside = ~_members(n, A)
        outside[0] = False
        bad = int((outside & (counts <= alpha * LL**1.5 / 2)).sum())
        check.samples += 1
        check.statistic = max(check.statistic, bad)
        if bad > size / 2:
            check.passed, check.witness = False, A
            break

    if alpha < L**2:
        r_max = int(L / (15 * LL))
        check = report.add(metadata.PropertyCheck("P6", True, False, 0.0, 5, None, 0, f"radius <= {r_max}"))
        roots = rng.choice(np.arange(1, n + 1), size=min(samples, n), replace=False)
        for v in roots:
            v = int(v)
            for r in range(r_max + 1):
                B = ball(G, v, r)
                for w in neighbor_sphere(G, v, r):
                    e = sum(m for u, m in G.neighbors(w).items() if u in B)
                    check.statistic = max(check.statistic, e)
                    if e > 5:
                        check.passed, check.witness = False, (v, r, w)
                        break
                if not check.passed:
                    break
            check.samples += 1
            if not check.passed:
                break
    else:
        report.add(metadata.PropertyCheck("P6", True, True, None, None, None, 0, "skipped: alpha >= ln^2 n"))
    return report


def _large_pair_check(G: Graph, name: str, t: int, samples: int, sampler: _SetSampler) -> metadata.PropertyCheck:
    # an edge between all disjoint A, B with |A|, |B| >= t fails iff some A of size t has t non-neighbours outside it
    n = G.n
    check = metadata.PropertyCheck(name, True, False, 0.0, float(t), None, 0)
    if 2 * t > n:
        check.exact, check.note = True, "vacuous: no two disjoint sets of this size"
        return check
    if isinstance(G, CompleteGraph):
        check.exact = True
        return check
    for _ in range(samples):
        A = sampler.sample(t)
        counts = _counts(G, A)
        free = ~_members(n, A) & (counts == 0)
        free[0] = False
        m = int(free.sum())
        check.samples += 1
        check.statistic = max(check.statistic, m)
        if m >= t:
            B = frozenset(int(v) for v in np.flatnonzero(free)[:t])
            check.passed, check.witness = False, (A, B)
            break
    return check


def trace_expansion_audit(gamma: Graph, beta: Optional[float] = None, samples: int = 1000, s: Optional[SeedStream] = None) -> metadata.AuditReport:
    """trace_expansion_audit small-set expansion and large-set edges of a trace

    E1 reports the minimum of |N(A)| / (|A| ln n) over sampled sets with
    |A| <= n / ln n and passes when it reaches ``beta`` (or is positive when
    no beta is given). E2 looks for disjoint sets of size
    n (ln ln n)^1.5 / ln n with no edge between them.
    """
    n = gamma.n
    if n < 16:
        raise ValueError(f"The trace expansion audit needs n >= 16, got n = {n}.")
    rng = (s or SeedStream()).child("trace-expansion").generator()
    sampler = _SetSampler(gamma, rng)
    L = math.log(n)
    report = metadata.AuditReport()

    cap = max(1, int(n / L))
    check = report.add(metadata.PropertyCheck("E1", True, False, math.inf, beta, None, 0))
    if isinstance(gamma, CompleteGraph):
        check.exact, check.statistic, check.samples = True, (n - cap) / (cap * L), 1
    else:
        for size in _sizes(1, cap, samples, rng):
            A = sampler.sample(size)
            counts = _counts(gamma, A)
            inside = _members(n, A)
            ratio = int(((counts > 0) & ~inside)[1:].sum()) / (len(A) * L)
            check.samples += 1
            if ratio < check.statistic:
                check.statistic, check.witness = ratio, A
    check.passed = check.statistic >= beta if beta is not None else check.statistic > 0
    if check.passed:
        check.witness = None

    t = math.ceil(n * math.log(L) ** 1.5 / L)
    report.add(_large_pair_check(gamma, "E2", t, samples, sampler))
    return report


def hks_thresholds(n: int, d: float) -> Tuple[float, float]:
    """Size thresholds of the small-set expansion and large-set edge conditions of the HKS criterion."""
    L = math.log(n)
    LL = math.log(L)
    LLL = math.log(LL)
    common = n * LL * math.log(d) / (L * LLL)
    return common / d, common / 4130


def hks_audit(G: Graph, d: float, samples: int = 1000, s: Optional[SeedStream] = None, enforce_range: bool = True) -> metadata.AuditReport:
    """hks_audit sampled check of the Hamiltonicity criterion with parameter d

    Q1: |N(S)| >= d|S| whenever |S| <= n lnln n ln d / (d ln n lnlnln n).
    Q2: an edge between any disjoint A, B of size >= n lnln n ln d / (4130 ln n lnlnln n).
    The criterion needs 12 <= d <= exp(∛ln n); ``enforce_range=False``
    lifts that requirement for desk-scale cross-checks.
    """
    n = G.n
    if n < 16:
        raise ValueError(f"The HKS audit needs n >= 16, got n = {n}.")
    if enforce_range and not 12 <= d <= math.exp(math.log(n) ** (1 / 3)):
        raise ValueError(f"d = {d} is outside [12, exp(ln(n)^(1/3))] = [12, {math.exp(math.log(n) ** (1 / 3)):.3f}] at n = {n}.")
    if d <= 1:
        raise ValueError(f"d must exceed 1, got {d}.")
    rng = (s or SeedStream()).child("hks").generator()
    sampler = _SetSampler(G, rng)
    s1, s2 = hks_thresholds(n, d)
    report = metadata.AuditReport()

    top = int(s1)
    check = report.add(metadata.PropertyCheck("Q1", True, False, math.inf, d, None, 0))
    if top < 1:
        check.exact, check.note = True, "vacuous: threshold below 1"
    elif isinstance(G, CompleteGraph):
        check.exact, check.samples = True, 1
        check.statistic = (n - top) / top
        if check.statistic < d:
            check.passed, check.witness = False, frozenset(range(1, top + 1))
    else:
        adj = _adjacency_bits(G)
        for size in _sizes(1, top, samples, rng):
            S = sampler.sample(size)
            ratio = _neighbourhood_size(adj, S) / len(S)
            check.samples += 1
            check.statistic = min(check.statistic, ratio)
            if ratio < d:
                check.passed, check.witness = False, S
                break

    report.add(_large_pair_check(G, "Q2", max(1, math.ceil(s2)), samples, sampler))
    report.add(metadata.PropertyCheck("criterion", report["Q1"].passed and report["Q2"].passed, False, note="one-sided: no violation found"))
    return report
