"""Half-lazy chain on a (multi)graph: stationary law, exact evolution, total variation, conductance.

Distributions are arrays of length n+1 indexed by vertex label, slot 0 unused.
"""
import math
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy import sparse

from walktrace import metadata
from walktrace.graph_tools import Graph, VertexSet, as_vertex_set, bfs_grown_set, edge_boundary
from walktrace.random_models import SeedStream

# tolerance on the total mass of an input distribution
MASS_TOL = 1e-12


def _check_distribution(mu: np.ndarray, n: Optional[int] = None) -> np.ndarray:
    mu = np.asarray(mu, dtype=np.float64)
    if n is not None and len(mu) != n + 1:
        raise ValueError(f"Distribution has length {len(mu)}, expected n+1 = {n + 1}.")
    if mu[0] != 0 or (mu < 0).any():
        raise ValueError("Distribution must be non-negative with slot 0 empty.")
    total = math.fsum(mu)
    if abs(total - 1) > MASS_TOL:
        raise ValueError(f"Distribution mass is {total}, not 1.")
    return mu


def point_mass(n: int, v: int) -> np.ndarray:
    mu = np.zeros(n + 1)
    mu[v] = 1.0
    return mu


def stationary_distribution(G: Graph) -> np.ndarray:
    """stationary_distribution π_v = d(v) / 2|E| with multigraph degrees"""
    if G.m_total == 0:
        raise ValueError("The stationary distribution is undefined on an edgeless graph.")
    d = G.degree_array().astype(np.float64)
    return d / (2.0 * G.m_total)


def stationary_mass(pi: np.ndarray, S: Iterable[int]) -> float:
    """π_S"""
    return math.fsum(pi[v] for v in S)


def transition_operator(G: Graph) -> sparse.csr_matrix:
    """P = ½ I + ½ D⁻¹ A on 0-based indices; an isolated vertex stays put."""
    n = G.n
    A = G.adjacency_matrix()
    d = np.asarray(A.sum(axis=1)).ravel()
    inv = np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)
    walk = sparse.diags(inv) @ A
    stay = np.where(d > 0, 0.5, 1.0)
    return (sparse.diags(stay) + 0.5 * walk).tocsr()


def _renormalise(x: np.ndarray) -> np.ndarray:
    # compensated column sums, one law per column
    if x.ndim == 1:
        return x / math.fsum(x)
    return x / np.array([math.fsum(col) for col in x.T])


def evolve(G: Graph, mu0: np.ndarray, t: int, P: Optional[sparse.csr_matrix] = None) -> np.ndarray:
    """evolve exact t-step law of the half-lazy walk started from mu0

    Each step applies the sparse transition operator and renormalises with
    a compensated sum, so the mass stays at 1 over long horizons.
    """
    if t < 0:
        raise ValueError(f"Number of steps must be non-negative, got t = {t}.")
    mu = _check_distribution(mu0, G.n).copy()
    if t == 0:
        return mu
    PT = (P if P is not None else transition_operator(G)).T.tocsr()
    x = mu[1:]
    for _ in range(t):
        x = _renormalise(PT @ x)
    out = np.zeros(G.n + 1)
    out[1:] = x
    return out


def tv_distance(mu: np.ndarray, nu: np.ndarray) -> float:
    """½ Σ_v |mu_v - nu_v|"""
    mu = np.asarray(mu, dtype=np.float64)
    nu = np.asarray(nu, dtype=np.float64)
    if mu.shape != nu.shape:
        raise ValueError("Distributions live on different vertex sets.")
    return 0.5 * math.fsum(np.abs(mu - nu))


def tv_distance_sup(mu: np.ndarray, nu: np.ndarray) -> Tuple[float, VertexSet]:
    """sup_S |mu(S) - nu(S)| by enumerating every vertex subset (n <= 20), with a maximising S."""
    diff = np.asarray(mu, dtype=np.float64)[1:] - np.asarray(nu, dtype=np.float64)[1:]
    n = len(diff)
    if n > 20:
        raise metadata.EnumerationBudgetError(f"Subset enumeration is capped at n = 20, got n = {n}.")
    sums = np.zeros(1)
    for i in range(n):
        sums = np.concatenate([sums, sums + diff[i]])
    best = int(np.argmax(np.abs(sums)))
    return float(abs(sums[best])), frozenset(i + 1 for i in range(n) if best >> i & 1)


def conductance(G: Graph, S: Iterable[int]) -> float:
    """conductance φ(S) = |∂S| / (2 min(vol S, vol S^c))"""
    S = as_vertex_set(G.n, S)
    if not S or len(S) == G.n:
        raise ValueError("Conductance needs a proper non-empty vertex subset.")
    d = G.degree_array()
    vol_S = int(sum(d[v] for v in S))
    vol_c = int(d.sum()) - vol_S
    denom = 2 * min(vol_S, vol_c)
    if denom == 0:
        return 0.0
    return edge_boundary(G, S) / denom


def sampled_phi(G: Graph, samples: int = 200, s: Optional[SeedStream] = None) -> Tuple[float, VertexSet]:
    """Minimum of φ over sampled cuts (uniform and BFS-grown); an upper bound on the conductance Φ."""
    if G.n < 2:
        raise ValueError("Conductance needs at least two vertices.")
    s = s or SeedStream()
    rng = s.child("phi").generator()
    best, witness = math.inf, None
    for i in range(samples):
        size = int(rng.integers(1, G.n))
        if i % 2 == 0:
            S = frozenset(int(v) for v in rng.choice(np.arange(1, G.n + 1), size=size, replace=False))
        else:
            S = bfs_grown_set(G, int(rng.integers(1, G.n + 1)), size, rng)
        value = conductance(G, S)
        if value < best:
            best, witness = value, S
    return best, witness


def js_bound(phi: float, pi_min: float, xi: float) -> float:
    """Mixing bound τ(ξ) <= (2/Φ²)(ln(1/π_min) + ln(1/ξ))."""
    if not 0 < phi <= 1:
        raise ValueError(f"Conductance must lie in (0,1], got {phi}.")
    if not 0 < pi_min <= 1:
        raise ValueError(f"pi_min must lie in (0,1], got {pi_min}.")
    if not 0 < xi < 1:
        raise ValueError(f"xi must lie in (0,1), got {xi}.")
    return 2.0 / phi**2 * (math.log(1 / pi_min) + math.log(1 / xi))


def js_reference(n: int, xi: float) -> float:
    """1800 ln(2n/ξ): the bound at Φ = 1/30 and π_min >= 5/(8n)."""
    return 1800 * math.log(2 * n / xi)


def buffer_bound(n: int) -> float:
    """3601 ln n, the reference for τ(1/n)."""
    return 3601 * math.log(n)


def empirical_mixing_time(
    G: Graph,
    xi: float,
    s: Optional[SeedStream] = None,
    max_steps: int = 100_000,
    exact_starts_cap: int = 500,
    sampled_starts: int = 32,
) -> metadata.MixingTime:
    """empirical_mixing_time first t with max over starts of d_TV(P^t(x,·), π) < ξ

    Parameters
    ----------
    G : Graph
        base graph, at least one edge
    xi : float
        target distance, 0 < xi < 1
    s : SeedStream, optional
        randomness for the sampled start set
    max_steps : int
        give up (steps = None) after this many steps
    exact_starts_cap : int
        every vertex is a start when n <= exact_starts_cap
    sampled_starts : int
        number of uniformly sampled starts above the cap

    Returns
    -------
    MixingTime
        the step count, the regime and the worst-start TV trajectory
    """
    if not 0 < xi < 1:
        raise ValueError(f"xi must lie in (0,1), got {xi}.")
    n = G.n
    pi = stationary_distribution(G)[1:]
    if n <= exact_starts_cap:
        starts = np.arange(1, n + 1)
        regime = "exact"
    else:
        rng = (s or SeedStream()).child("mixing-starts").generator()
        starts = np.sort(rng.choice(np.arange(1, n + 1), size=min(sampled_starts, n), replace=False))
        regime = "sampled"
    PT = transition_operator(G).T.tocsr()
    M = np.zeros((n, len(starts)))
    M[starts - 1, np.arange(len(starts))] = 1.0
    history = []
    steps, worst = None, None
    for t in range(max_steps + 1):
        tv = 0.5 * np.abs(M - pi[:, None]).sum(axis=0)
        j = int(np.argmax(tv))
        history.append(float(tv[j]))
        if tv[j] < xi:
            steps = t
            break
        worst = int(starts[j])
        M = _renormalise(PT @ M)
    return metadata.MixingTime(steps, xi, regime, len(starts), worst, history)
