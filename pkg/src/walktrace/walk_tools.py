import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np

from walktrace import metadata
from walktrace.graph_tools import CompleteGraph, Graph, MultiGraph
from walktrace.hamilton_tools import is_hamiltonian, posa_longest_path
from walktrace.random_models import SeedStream
from walktrace.structure_tools import has_perfect_matching, is_k_connected, matching_from_hamilton_path, vertex_connectivity


class Laziness(str, Enum):
    NONE = "none"
    HALF = "half"
    INVERSE_N = "inverse_n"

    @classmethod
    def parse(cls, value) -> "Laziness":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).replace("-", "_").lower())
        except ValueError:
            raise ValueError(f"Unknown laziness '{value}', expected one of none, half, inverse-n.")

    def stay_probability(self, n: int) -> float:
        if self is Laziness.HALF:
            return 0.5
        if self is Laziness.INVERSE_N:
            return 1.0 / n
        return 0.0


@dataclass
class Walk:
    """A recorded walk X_0..X_t on a base graph.

    ``lazy[i-1]`` is True when step i was a lazy stay (as opposed to a
    traversal, which on a multigraph may itself be a loop). Stays enter the
    trace as loops only when ``record_stays`` is set.
    """

    base: Graph
    laziness: Laziness
    steps: np.ndarray
    lazy: np.ndarray = None
    record_stays: Optional[bool] = None
    master_seed: int = 0
    run_index: int = 0

    def __post_init__(self):
        self.laziness = Laziness.parse(self.laziness)
        self.steps = np.asarray(self.steps, dtype=np.int64)
        if self.steps.ndim != 1 or len(self.steps) == 0:
            raise ValueError("A walk needs at least its start vertex.")
        if self.lazy is None:
            self.lazy = np.zeros(len(self.steps) - 1, dtype=bool)
        self.lazy = np.asarray(self.lazy, dtype=bool)
        if len(self.lazy) != len(self.steps) - 1:
            raise ValueError("lazy mask must have one entry per step.")
        if self.record_stays is None:
            self.record_stays = self.laziness is Laziness.INVERSE_N

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def start(self) -> int:
        return int(self.steps[0])

    @property
    def length(self) -> int:
        return len(self.steps) - 1

    def __len__(self) -> int:
        return self.length

    def extend(self, extra: int, s: Optional[SeedStream] = None) -> "Walk":
        """Continue the walk for ``extra`` more steps; the block's randomness depends only on (seed, current length)."""
        if extra < 0:
            raise ValueError(f"Cannot extend by a negative number of steps ({extra}).")
        s = s or SeedStream(self.master_seed, self.run_index)
        rng = s.child("walk", "block", self.length).generator()
        new, lazy = _draw_steps(self.base, int(self.steps[-1]), extra, self.laziness, rng)
        return Walk(
            self.base,
            self.laziness,
            np.concatenate([self.steps, new]),
            np.concatenate([self.lazy, lazy]),
            self.record_stays,
            self.master_seed,
            self.run_index,
        )

    def save(self, path: str) -> None:
        """Replay file (.npz): steps, lazy mask, header (n, laziness, seeds) and the base graph."""
        if isinstance(self.base, CompleteGraph):
            kind, pairs, loops = "complete", np.zeros((0, 3), dtype=np.int64), np.zeros((0, 2), dtype=np.int64)
        else:
            kind = "multigraph"
            pairs = np.array([(u, v, m) for (u, v), m in self.base.pairs().items()], dtype=np.int64).reshape(-1, 3)
            loops = np.array([(v, self.base.loops(v)) for v in range(1, self.n + 1) if self.base.loops(v)], dtype=np.int64).reshape(-1, 2)
        np.savez_compressed(
            path,
            steps=self.steps.astype(np.int32),
            lazy=self.lazy,
            n=self.n,
            kind=kind,
            laziness=self.laziness.value,
            record_stays=bool(self.record_stays),
            master_seed=np.uint64(self.master_seed),
            run_index=self.run_index,
            pairs=pairs,
            loops=loops,
        )

    @classmethod
    def load(cls, path: str) -> "Walk":
        with np.load(path, allow_pickle=False) as f:
            n = int(f["n"])
            if str(f["kind"]) == "complete":
                base = CompleteGraph(n)
            else:
                base = MultiGraph(n, {(int(u), int(v)): int(m) for u, v, m in f["pairs"]}, {int(v): int(c) for v, c in f["loops"]})
            return cls(
                base,
                Laziness(str(f["laziness"])),
                f["steps"].astype(np.int64),
                f["lazy"],
                bool(f["record_stays"]),
                int(f["master_seed"]),
                int(f["run_index"]),
            )


def _draw_steps(G: Graph, x0: int, t: int, laziness: Laziness, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    n = G.n
    if t == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=bool)

    if isinstance(G, CompleteGraph):
        if laziness is Laziness.INVERSE_N:
            # staying w.p. 1/n then moving uniformly is a uniform draw over [n]
            X = rng.integers(1, n + 1, size=t)
            prev = np.concatenate([[x0], X[:-1]])
            return X, X == prev
        if n == 1:
            if laziness is Laziness.NONE:
                raise ValueError("The start vertex of K_1 is isolated; a non-lazy walk cannot move.")
            return np.ones(t, dtype=np.int64), np.ones(t, dtype=bool)
        offsets = rng.integers(1, n, size=t)
        lazy = np.zeros(t, dtype=bool)
        if laziness is Laziness.HALF:
            lazy = rng.random(t) < 0.5
            offsets[lazy] = 0
        X = (x0 - 1 + np.cumsum(offsets)) % n + 1
        return X, lazy

    indptr, targets = G.stubs
    deg = G.degree_array()
    if deg[x0] == 0 and laziness is Laziness.NONE:
        raise ValueError(f"Start vertex {x0} is isolated; a non-lazy walk cannot move.")
    stay_p = laziness.stay_probability(n)
    lazy = rng.random(t) < stay_p if stay_p > 0 else np.zeros(t, dtype=bool)
    u = rng.random(t)
    X = np.empty(t, dtype=np.int64)
    x = x0
    for i in range(t):
        d = deg[x]
        if lazy[i] or d == 0:
            lazy[i] = True
        else:
            x = int(targets[indptr[x] + int(u[i] * d)])
        X[i] = x
    return X, lazy


def run_walk(
    G: Graph,
    start: Optional[int],
    t: int,
    laziness="none",
    s: Optional[SeedStream] = None,
    record_stays: Optional[bool] = None,
) -> Walk:
    """run_walk random walk of length t on G

    Neighbours are chosen proportionally to multiplicity (a loop counts
    twice). On K_n with laziness ``inverse_n`` every position after the
    start is uniform over all n vertices.

    Parameters
    ----------
    G : Graph
        base graph (MultiGraph or CompleteGraph)
    start : int or None
        start vertex, None draws it uniformly
    t : int
        number of steps
    laziness : Laziness or str
        none, half or inverse_n
    s : SeedStream
        randomness for this walk
    record_stays : bool, optional
        record lazy stays as loops in the trace (default: only for inverse_n)

    Returns
    -------
    Walk
        the walk X_0..X_t
    """
    laziness = Laziness.parse(laziness)
    if t < 0:
        raise ValueError(f"Walk length must be non-negative, got t = {t}.")
    s = s or SeedStream()
    rng = s.child("walk").generator()
    if start is None:
        start = int(rng.integers(1, G.n + 1))
    if start < 1 or start > G.n:
        raise ValueError(f"Start vertex {start} is outside 1..{G.n}.")
    if laziness is Laziness.NONE and G.degree(start) == 0:
        raise ValueError(f"Start vertex {start} is isolated; a non-lazy walk cannot move.")
    X, lazy = _draw_steps(G, start, t, laziness, rng)
    return Walk(G, laziness, np.concatenate([[start], X]), lazy, record_stays, s.master_seed, s.run_index)


def _step_mask(w: Walk, lo: int, hi: int, parity: str) -> np.ndarray:
    if parity not in ("all", "odd", "even"):
        raise ValueError(f"parity must be 'all', 'odd' or 'even', got '{parity}'.")
    idx = np.arange(1, w.length + 1)
    mask = (idx >= lo) & (idx <= hi)
    if parity == "odd":
        mask &= idx % 2 == 1
    elif parity == "even":
        mask &= idx % 2 == 0
    if not w.record_stays:
        mask &= ~w.lazy
    return mask


def trace_view(w: Walk, lo: int = 1, hi: Optional[int] = None, parity: str = "all") -> MultiGraph:
    """trace_view multigraph of the edges e_i = (X_{i-1}, X_i), lo <= i <= hi, of the requested parity"""
    hi = w.length if hi is None else min(hi, w.length)
    lo = max(lo, 1)
    mask = _step_mask(w, lo, hi, parity)
    return MultiGraph.from_arrays(w.n, w.steps[:-1][mask], w.steps[1:][mask])


def step_edges(w: Walk, lo: int = 1, hi: Optional[int] = None, parity: str = "all") -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(step index, tail, head) of the edge instances a trace_view would contain."""
    hi = w.length if hi is None else min(hi, w.length)
    mask = _step_mask(w, max(lo, 1), hi, parity)
    return np.flatnonzero(mask) + 1, w.steps[:-1][mask], w.steps[1:][mask]


def visit_stats(w: Walk, horizon: Optional[int] = None, track_k: Iterable[int] = ()) -> metadata.VisitStats:
    """visit_stats visits μ, exits ν, first and k-th visit times up to the horizon

    ν(v) counts times 0 <= s < horizon with X_s = v and X_{s+1} != v.
    """
    horizon = w.length if horizon is None else horizon
    if horizon < 0 or horizon > w.length:
        raise ValueError(f"Horizon {horizon} outside 0..{w.length}.")
    X = w.steps[: horizon + 1]
    n = w.n
    mu = np.bincount(X, minlength=n + 1)
    moved = X[:-1] != X[1:]
    nu = np.bincount(X[:-1][moved], minlength=n + 1)

    first = np.full(n + 1, -1, dtype=np.int64)
    verts, pos = np.unique(X, return_index=True)
    first[verts] = pos

    kth = {}
    track_k = sorted(set(int(k) for k in track_k))
    if track_k:
        order = np.argsort(X, kind="stable")
        sorted_v = X[order]
        begin = np.searchsorted(sorted_v, np.arange(n + 1), side="left")
        for k in track_k:
            if k < 1:
                raise ValueError(f"Visit index k must be at least 1, got {k}.")
            times = np.full(n + 1, -1, dtype=np.int64)
            have = np.flatnonzero(mu >= k)
            times[have] = order[begin[have] + k - 1]
            kth[k] = times
    return metadata.VisitStats(horizon, mu, nu, first, kth)


def k_cover_time(w: Walk, k: int = 1) -> Optional[int]:
    """k_cover_time first t at which every vertex has been visited k times, None if never"""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}.")
    stats = visit_stats(w, track_k=[k])
    times = stats.kth_visit_time[k][1:]
    if (times < 0).any():
        return None
    return int(times.max())


def remove_stays(w: Walk) -> Walk:
    """The walk with lazy stays deleted; its length is the number of moves R."""
    keep = np.concatenate([[True], ~w.lazy])
    steps = w.steps[keep]
    return Walk(w.base, Laziness.NONE, steps, np.zeros(len(steps) - 1, dtype=bool), False, w.master_seed, w.run_index)


def moves_count(w: Walk) -> int:
    return int((~w.lazy).sum())


def simple_degree_times(w: Walk) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """First-occurrence step of every simple trace edge, sorted by step: (times, u, v)."""
    idx, a, b = step_edges(w)
    proper = a != b
    idx, a, b = idx[proper], a[proper], b[proper]
    if len(idx) == 0:
        z = np.zeros(0, dtype=np.int64)
        return z, z, z
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    keys = lo * (w.n + 1) + hi
    _, first = np.unique(keys, return_index=True)
    first = np.sort(first)
    return idx[first], lo[first], hi[first]


def _min_degree_times(n: int, times: np.ndarray, u: np.ndarray, v: np.ndarray, M: int) -> List[Optional[int]]:
    # τ_δ^m = max over v of the step at which v gains its m-th distinct neighbour
    ends = np.concatenate([u, v])
    t2 = np.concatenate([times, times])
    order = np.lexsort((t2, ends))
    ends, t2 = ends[order], t2[order]
    counts = np.bincount(ends, minlength=n + 1)
    begin = np.concatenate([[0], np.cumsum(counts)[:-1]])
    out = []
    for m in range(1, M + 1):
        if n <= m or (counts[1:] < m).any():
            out.append(None)
            continue
        out.append(int(t2[begin[1:] + m - 1].max()))
    return out


def min_degree_times(w: Walk, M: int) -> List[Optional[int]]:
    """τ_δ^m for m = 1..M (first step with simple minimum degree >= m)."""
    times, u, v = simple_degree_times(w)
    return _min_degree_times(w.n, times, u, v, M)


def _first_satisfying(
    n: int,
    times: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    t0: Optional[int],
    pred: Callable[[MultiGraph, int], bool],
) -> Tuple[Optional[int], int]:
    # the simple trace only changes at new-edge times, so those are the only candidates after t0
    if t0 is None:
        return None, 0
    candidates = [t0] + [int(t) for t in times[times > t0]]
    checks = 0
    for cand in candidates:
        upto = np.searchsorted(times, cand, side="right")
        G = MultiGraph(n, {(int(a), int(b)): 1 for a, b in zip(u[:upto], v[:upto])})
        checks += 1
        if pred(G, cand):
            return cand, checks
    return None, checks


def hitting_times(w: Walk, K: int = 1, s: Optional[SeedStream] = None, exact_cap: int = 40) -> metadata.HittingRecord:
    """hitting_times hitting times of the monotone trace properties

    Candidate-time strategy: each property is tested first at its
    deterministic lower bound (τ_δ^m for m-connectivity, max(τ_C+1, τ_δ^2)
    for Hamiltonicity, max(τ_C, τ_δ^1) for a perfect matching) and then at
    every later step that adds a new simple edge.

    Parameters
    ----------
    w : Walk
        the walk
    K : int
        largest cover multiplicity, τ_δ and τ_κ are reported for m = 1..2K
    s : SeedStream, optional
        randomness for the Pósa engine
    exact_cap : int
        largest n for which negative Hamiltonicity answers are exact

    Returns
    -------
    HittingRecord
        None entries mark properties not reached within the walk
    """
    if K < 1:
        raise ValueError(f"K must be at least 1, got {K}.")
    s = s or SeedStream(w.master_seed, w.run_index)
    n = w.n
    stats = visit_stats(w, track_k=range(1, K + 1))
    cover = []
    for k in range(1, K + 1):
        t = stats.kth_visit_time[k][1:]
        cover.append(None if (t < 0).any() else int(t.max()))

    times, u, v = simple_degree_times(w)
    min_degree = _min_degree_times(n, times, u, v, 2 * K)
    audits = {}

    connectivity = []
    for m in range(1, 2 * K + 1):
        t_m, checks = _first_satisfying(n, times, u, v, min_degree[m - 1], lambda G, t, m=m: is_k_connected(G, m))
        connectivity.append(t_m)
        audits[f"kappa{m}_checks"] = checks

    tau_H, tau_H_exact = None, True
    if n >= 3 and cover[0] is not None and min_degree[1] is not None:
        inexact = []

        def hamiltonian(G, t):
            verdict = is_hamiltonian(G, s.child("hamilton", t), exact_cap=exact_cap)
            if not verdict.hamiltonian and not verdict.exact:
                inexact.append(t)
            return verdict.hamiltonian

        tau_H, audits["H_checks"] = _first_satisfying(n, times, u, v, max(cover[0] + 1, min_degree[1]), hamiltonian)
        tau_H_exact = not inexact

    tau_PM = None
    if n % 2 == 0 and cover[0] is not None and min_degree[0] is not None:

        def perfect_matching(G, t):
            state = posa_longest_path(G, s.child("matching", t))
            if len(state.path) == n:
                matching_from_hamilton_path(state.path, G)
                return True
            return has_perfect_matching(G)[0]

        tau_PM, audits["PM_checks"] = _first_satisfying(n, times, u, v, max(cover[0], min_degree[0]), perfect_matching)

    return metadata.HittingRecord(
        n=n,
        K=K,
        length=w.length,
        cover=cover,
        min_degree=min_degree,
        connectivity=connectivity,
        tau_H=tau_H,
        tau_PM=tau_PM,
        tau_H_exact=tau_H_exact,
        max_multiplicity=trace_view(w).max_multiplicity,
        audits=audits,
    )


def scan_hitting_times(w: Walk, K: int = 1, s: Optional[SeedStream] = None) -> metadata.HittingRecord:
    """Step-by-step oracle: rebuild the trace at every t and test every property from scratch (small n only)."""
    s = s or SeedStream(w.master_seed, w.run_index)
    n = w.n
    cover = [None] * K
    min_degree = [None] * (2 * K)
    connectivity = [None] * (2 * K)
    tau_H = tau_PM = None
    for t in range(w.length + 1):
        G = trace_view(w, 1, t)
        mu = np.bincount(w.steps[: t + 1], minlength=n + 1)[1:]
        ds = G.simple_degree_array()[1:]
        for k in range(1, K + 1):
            if cover[k - 1] is None and mu.min() >= k:
                cover[k - 1] = t
        kappa = vertex_connectivity(G)
        for m in range(1, 2 * K + 1):
            if min_degree[m - 1] is None and n > m and ds.min() >= m:
                min_degree[m - 1] = t
            if connectivity[m - 1] is None and n > m and kappa >= m:
                connectivity[m - 1] = t
        if tau_H is None and n >= 3 and is_hamiltonian(G, s.child("hamilton", t)).hamiltonian:
            tau_H = t
        if tau_PM is None and n % 2 == 0 and has_perfect_matching(G)[0]:
            tau_PM = t
    return metadata.HittingRecord(
        n=n,
        K=K,
        length=w.length,
        cover=cover,
        min_degree=min_degree,
        connectivity=connectivity,
        tau_H=tau_H,
        tau_PM=tau_PM,
        max_multiplicity=trace_view(w).max_multiplicity,
    )


def default_length(n: int, epsilon: float) -> int:
    """(1 + epsilon) n ln n, rounded up."""
    if n < 2:
        return 1
    return max(1, math.ceil((1 + epsilon) * n * math.log(n)))
