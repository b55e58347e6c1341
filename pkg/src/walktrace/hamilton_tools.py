import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Set, Tuple

import networkx as nx
import numpy as np

from walktrace import metadata
from walktrace.graph_tools import CompleteGraph, Graph, MultiGraph, simplify
from walktrace.random_models import SeedStream

# exact subset DP limit (maximum path length, exact boosters)
SUBSET_DP_CAP = 18
EXACT_CAP = 40
# bound on memoised dead (visited-set, end) states of the exact search
_FAILED_STATES_CAP = 2_000_000


@dataclass
class PathState:
    path: List[int] = field(default_factory=lambda: [])
    is_cycle: bool = False
    rounds: int = 0
    # fixed start -> endpoints reachable by rotations in the last search
    endpoint_sets: Dict[int, Set[int]] = field(default_factory=lambda: {})

    @property
    def length(self) -> int:
        return max(0, len(self.path) - 1)


def _bits(x: int):
    while x:
        b = x & -x
        yield b.bit_length() - 1
        x ^= b


def _popcount(x: int) -> int:
    return bin(x).count("1")


class PosaEngine:
    """Rotation-extension search for long paths and Hamilton cycles.

    A path is first extended greedily (the next vertex is the off-path
    neighbour with the fewest off-path neighbours of its own). When both
    ends are stuck, rotations with a fixed start are explored breadth-first
    until some new end can be extended, the path closes into a Hamilton
    cycle, or it closes into a cycle with an edge leaving it. The same
    search is then repeated from the other side of every endpoint found.
    Neighbours are scanned in ascending label order; rotations are counted
    against a budget (default 20 n per run).
    """

    def __init__(self, G: Graph, s: Optional[SeedStream] = None, budget: Optional[int] = None):
        self.n = G.n
        self.adj = [[]] + [sorted(G.neighbors(v)) for v in range(1, self.n + 1)]
        self.adjset = [set(a) for a in self.adj]
        self.budget = 20 * self.n if budget is None else budget
        self.s = s or SeedStream()
        self.rounds = 0
        self.endpoint_sets = {}

    def min_degree_vertex(self) -> int:
        return min(range(1, self.n + 1), key=lambda v: (len(self.adj[v]), v))

    def _has_off(self, v: int, members: Set[int]) -> bool:
        return any(u not in members for u in self.adj[v])

    def _pick(self, v: int, members: Set[int]) -> Optional[int]:
        cands = [u for u in self.adj[v] if u not in members]
        if not cands:
            return None
        return min(cands, key=lambda u: (sum(1 for x in self.adj[u] if x not in members), u))

    def _extend(self, path: List[int], members: Set[int]) -> None:
        while True:
            nxt = self._pick(path[-1], members)
            if nxt is None:
                nxt = self._pick(path[0], members)
                if nxt is None:
                    return
                path.reverse()
            path.append(nxt)
            members.add(nxt)

    def _open_cycle(self, Q: List[int], members: Set[int]) -> Optional[List[int]]:
        # Q[0] ~ Q[-1]: cut the cycle after a vertex with an outside neighbour z and append z
        for j, v in enumerate(Q):
            for z in self.adj[v]:
                if z not in members:
                    return Q[j + 1 :] + Q[: j + 1] + [z]
        return None

    def rotate(self, Q: List[int], pivot_index: int) -> List[int]:
        """Rotation at Q[pivot_index] (adjacent to the end): the new end is Q[pivot_index + 1]."""
        return Q[: pivot_index + 1] + Q[:pivot_index:-1]

    def _bfs_rotations(self, P: List[int], accept: Callable[[List[int]], object]):
        hit = accept(P)
        found = {P[-1]: P}
        if hit is not None:
            return hit, found
        queue = deque([P])
        while queue:
            Q = queue.popleft()
            pos = {v: i for i, v in enumerate(Q)}
            for p in self.adj[Q[-1]]:
                i = pos.get(p)
                if i is None or i >= len(Q) - 2 or Q[i + 1] in found:
                    continue
                if self.rounds >= self.budget:
                    return None, found
                self.rounds += 1
                R = self.rotate(Q, i)
                found[R[-1]] = R
                hit = accept(R)
                if hit is not None:
                    return hit, found
                queue.append(R)
        return None, found

    def rotation_endpoints(self, P: List[int]) -> Dict[int, List[int]]:
        """Every end reachable from P by rotations with P[0] fixed, each with one path realising it."""
        _, found = self._bfs_rotations(list(P), lambda Q: None)
        return found

    def search(self, P: List[int], accept: Callable[[List[int]], object]):
        """Two-level rotation search: first with P[0] fixed, then from the far side of every endpoint found."""
        hit, ends = self._bfs_rotations(list(P), accept)
        self.endpoint_sets = {P[0]: set(ends)}
        if hit is not None:
            return hit
        for Pb in list(ends.values()):
            if self.rounds >= self.budget:
                break
            hit, second = self._bfs_rotations(Pb[::-1], accept)
            self.endpoint_sets[Pb[-1]] = set(second)
            if hit is not None:
                return hit
        return None

    def _improve(self, path: List[int], members: Set[int]) -> Optional[List[int]]:
        n = self.n
        leaving = any(self._has_off(v, members) for v in path)

        def accept(Q):
            end = Q[-1]
            if self._has_off(end, members):
                return Q
            if Q[0] in self.adjset[end]:
                if len(Q) == n and n >= 3:
                    return Q
                if leaving:
                    return self._open_cycle(Q, members)
            return None

        return self.search(path, accept)

    def run(self, start: Optional[int] = None, path: Optional[List[int]] = None) -> PathState:
        """Grow a path from ``start`` (or continue ``path``) until it closes or the budget runs out."""
        if self.n == 0:
            return PathState()
        if path is None:
            path = [self.min_degree_vertex() if start is None else start]
        path = list(path)
        members = set(path)
        self.rounds = 0
        self.endpoint_sets = {}
        while True:
            self._extend(path, members)
            if len(path) == self.n and self.n >= 3 and path[0] in self.adjset[path[-1]]:
                return PathState(path, True, self.rounds, self.endpoint_sets)
            Q = self._improve(path, members)
            if Q is None:
                return PathState(path, False, self.rounds, self.endpoint_sets)
            members.update(Q)
            path = Q


def posa_longest_path(G: Graph, s: Optional[SeedStream] = None, budget: Optional[int] = None, restarts: int = 1) -> PathState:
    """posa_longest_path long path (or Hamilton cycle) by rotation-extension

    The first run starts at a vertex of minimum degree, later restarts at
    uniformly drawn vertices. The returned length is a lower bound on the
    maximum path length.

    Parameters
    ----------
    G : Graph
        graph, multiplicities and loops are ignored
    s : SeedStream, optional
        randomness for the restart vertices
    budget : int, optional
        rotations per run, default 20 n
    restarts : int
        number of runs

    Returns
    -------
    PathState
        the longest path found, ``is_cycle`` set when it closes a Hamilton cycle
    """
    s = s or SeedStream()
    engine = PosaEngine(simplify(G), s, budget)
    if G.n == 0:
        return PathState()
    rng = s.child("restarts").generator()
    best = None
    for r in range(max(1, restarts)):
        start = None if r == 0 else int(rng.integers(1, G.n + 1))
        state = engine.run(start)
        if best is None or state.is_cycle or len(state.path) > len(best.path):
            best = state
        if best.is_cycle:
            break
    return best


def is_hamilton_cycle(G: Graph, cycle: Iterable[int]) -> bool:
    """Witness check: a cyclic order of all n >= 3 vertices with consecutive vertices adjacent."""
    cycle = list(cycle)
    n = G.n
    if n < 3 or len(cycle) != n or set(cycle) != set(range(1, n + 1)):
        return False
    return all(G.has_edge(a, b) for a, b in zip(cycle, cycle[1:] + cycle[:1]))


def _adjacency_bits(G: Graph, offset: int = 0) -> List[int]:
    # offset 0: bit v for label v; offset 1: bit v-1
    adj = [0] * (G.n + 1)
    for v in range(1, G.n + 1):
        for u in G.neighbors(v):
            adj[v] |= 1 << (u - offset)
    return adj


def exact_hamilton_cycle(G: Graph) -> Optional[List[int]]:
    """Backtracking search with degree pruning and memoised dead states; a Hamilton cycle or None."""
    n = G.n
    if n < 3:
        return None
    adj = _adjacency_bits(G)
    full = sum(1 << v for v in range(1, n + 1))
    v0 = min(range(1, n + 1), key=lambda v: (_popcount(adj[v]), v))
    failed = set()

    def feasible(visited, end):
        allowed = (full & ~visited) | (1 << end) | (1 << v0)
        for w in _bits(full & ~visited):
            if _popcount(adj[w] & allowed) < 2:
                return False
        return True

    def dfs(path, visited):
        end = path[-1]
        if visited == full:
            return bool(adj[end] >> v0 & 1)
        key = (visited, end)
        if key in failed:
            return False
        cands = sorted(_bits(adj[end] & ~visited), key=lambda w: (_popcount(adj[w] & ~visited), w))
        for w in cands:
            nv = visited | (1 << w)
            if not feasible(nv, w):
                continue
            path.append(w)
            if dfs(path, nv):
                return True
            path.pop()
        if len(failed) > _FAILED_STATES_CAP:
            failed.clear()
        failed.add(key)
        return False

    path = [v0]
    return path if dfs(path, 1 << v0) else None


def _obviously_not_hamiltonian(G: MultiGraph) -> bool:
    ds = G.simple_degree_array()
    if ds[1:].min() < 2:
        return True
    H = G.to_networkx()
    if not nx.is_biconnected(H):
        return True
    # a vertex with three degree-2 neighbours would need three cycle edges
    for v in range(1, G.n + 1):
        if sum(1 for u in G.neighbors(v) if ds[u] == 2) >= 3:
            return True
    return False


def is_hamiltonian(
    G: Graph,
    s: Optional[SeedStream] = None,
    restarts: int = 3,
    budget: Optional[int] = None,
    exact_cap: int = EXACT_CAP,
) -> metadata.HamiltonVerdict:
    """is_hamiltonian Hamiltonicity with a cycle witness

    Cheap exact rejections first (n < 3, a vertex of degree < 2, a cut
    vertex, a vertex with three degree-2 neighbours), then the Pósa engine
    with restarts, then exact backtracking when n <= exact_cap. Beyond the
    cap a heuristic failure is reported as non-Hamiltonian with
    ``exact=False``.
    """
    n = G.n
    if n < 3:
        return metadata.HamiltonVerdict(False, None, True)
    if isinstance(G, CompleteGraph):
        return metadata.HamiltonVerdict(True, list(range(1, n + 1)), True)
    G = simplify(G)
    if _obviously_not_hamiltonian(G):
        return metadata.HamiltonVerdict(False, None, True)
    state = posa_longest_path(G, s, budget, restarts)
    if state.is_cycle:
        return metadata.HamiltonVerdict(True, state.path, True)
    if n <= exact_cap:
        cycle = exact_hamilton_cycle(G)
        return metadata.HamiltonVerdict(cycle is not None, cycle, True)
    warnings.warn(f"Hamiltonicity of a graph on {n} > {exact_cap} vertices decided heuristically (treated as non-Hamiltonian).")
    return metadata.HamiltonVerdict(False, None, False)


def _check_dp_size(n: int) -> None:
    if n > SUBSET_DP_CAP:
        raise metadata.EnumerationBudgetError(f"Exact subset dynamic programming is capped at n = {SUBSET_DP_CAP}, got n = {n}.")


def _reach_table(adj0: List[int], n: int) -> np.ndarray:
    """reach[mask]: bitmask of the vertices at which some path with vertex set exactly ``mask`` ends (bits are label-1)."""
    size = 1 << n
    reach = [0] * size
    for v in range(n):
        reach[1 << v] = 1 << v
    for mask in range(1, size):
        ends = reach[mask]
        if not ends:
            continue
        for v in _bits(ends):
            for w in _bits(adj0[v] & ~mask):
                reach[mask | (1 << w)] |= 1 << w
    return np.array(reach, dtype=np.int64)


def _popcounts(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    pop = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        pop += (idx >> i) & 1
    return pop


def _simple_adj0(G: Graph) -> List[int]:
    return _adjacency_bits(G, offset=1)[1:]


def max_path_length(G: Graph) -> int:
    """Exact number of edges of a longest path (subset DP, n <= 18)."""
    n = G.n
    _check_dp_size(n)
    if n == 0:
        return 0
    reach = _reach_table(_simple_adj0(G), n)
    return int(_popcounts(n)[reach > 0].max()) - 1


def hamilton_paths_between(G: Graph) -> Set[Tuple[int, int]]:
    """All pairs u < v joined by a Hamilton path (per-start subset DP, n <= 18)."""
    n = G.n
    _check_dp_size(n)
    adj0 = _simple_adj0(G)
    full = (1 << n) - 1
    pairs = set()
    for s in range(n):
        dp = [0] * (1 << n)
        dp[1 << s] = 1 << s
        for mask in range(1 << s, 1 << n):
            ends = dp[mask]
            if not ends:
                continue
            for v in _bits(ends):
                for w in _bits(adj0[v] & ~mask):
                    dp[mask | (1 << w)] |= 1 << w
        for v in _bits(dp[full]):
            if v > s:
                pairs.add((s + 1, v + 1))
    return pairs


def _subset_max(g: np.ndarray, n: int) -> np.ndarray:
    # h[S] = max over B ⊆ S of g[B]
    h = g.copy()
    for i in range(n):
        view = h.reshape(-1, 2, 1 << i)
        np.maximum(view[:, 1, :], view[:, 0, :], out=view[:, 1, :])
    return h


def _non_edges(G: Graph) -> List[Tuple[int, int]]:
    return [(u, v) for u in range(1, G.n + 1) for v in range(u + 1, G.n + 1) if not G.has_edge(u, v)]


def _exact_boosters(H: MultiGraph) -> Set[Tuple[int, int]]:
    n = H.n
    _check_dp_size(n)
    non_edges = _non_edges(H)
    if is_hamiltonian(H, exact_cap=SUBSET_DP_CAP).hamiltonian:
        return set(non_edges)
    adj0 = _simple_adj0(H)
    reach = _reach_table(adj0, n)
    pop = _popcounts(n)
    L = int(pop[reach > 0].max()) - 1
    if L == n - 1:
        closing = hamilton_paths_between(H)
        return {e for e in non_edges if e in closing}
    # L(H+uv) = max(L, |A| + |B| - 1) over disjoint A, B with paths on A ending at u and on B ending at v
    NEG = -(1 << 20)
    g = [np.where(((reach >> v) & 1) == 1, pop, NEG) for v in range(n)]
    h = [_subset_max(gv, n) for gv in g]
    comp = ((1 << n) - 1) ^ np.arange(1 << n, dtype=np.int64)
    out = set()
    for u, v in non_edges:
        best = int((g[u - 1] + h[v - 1][comp]).max()) - 1
        if best > L:
            out.add((u, v))
    return out


def _certified_pairs(H: MultiGraph, s: SeedStream, budget: Optional[int]) -> Set[Tuple[int, int]]:
    # non-edges {x, y} for which H + xy provably has a longer path than the engine's best path
    state = posa_longest_path(H, s.child("certify"), budget)
    if state.is_cycle:
        return set(_non_edges(H))
    P = state.path
    members = set(P)
    engine = PosaEngine(H, s, budget)
    spans = len(P) == H.n
    leaving = any(engine._has_off(v, members) for v in P)
    out = set()

    def record(Q):
        a, b = Q[0], Q[-1]
        if not H.has_edge(a, b) and a != b and (spans or leaving):
            out.add((min(a, b), max(a, b)))
        for y in range(1, H.n + 1):
            if y not in members and not H.has_edge(b, y):
                out.add((min(b, y), max(b, y)))
        return None

    engine.search(P, record)
    return out


def boosters(H: Graph, mode: str = "exact", samples: int = 200, s: Optional[SeedStream] = None, budget: Optional[int] = None) -> Set[Tuple[int, int]]:
    """boosters non-edges whose addition makes H Hamiltonian or lengthens its longest path

    Parameters
    ----------
    H : Graph
        graph, simplified internally
    mode : str
        ``exact`` (n <= 18, all boosters) or ``sampled`` (verified boosters
        among sampled non-edges, certified by rotation endpoints of the
        engine's best path)
    samples : int
        non-edges drawn in sampled mode
    s : SeedStream, optional
        randomness for sampling and the engine

    Returns
    -------
    Set[Tuple[int, int]]
        boosters as pairs (u, v) with u < v
    """
    H = simplify(H) if isinstance(H, MultiGraph) else H.to_multigraph()
    if mode == "exact":
        return _exact_boosters(H)
    if mode != "sampled":
        raise ValueError(f"mode must be 'exact' or 'sampled', got '{mode}'.")
    s = s or SeedStream()
    rng = s.child("booster-samples").generator()
    non_edges = _non_edges(H)
    if not non_edges:
        return set()
    picks = rng.choice(len(non_edges), size=min(samples, len(non_edges)), replace=False)
    certified = _certified_pairs(H, s, budget)
    return {non_edges[i] for i in picks if non_edges[i] in certified}


def _pool_pairs(pool) -> Set[Tuple[int, int]]:
    if isinstance(pool, (MultiGraph, CompleteGraph)):
        return set(pool.pairs())
    return {(min(u, v), max(u, v)) for u, v in pool if u != v}


def _pool_partners(H: MultiGraph, pool_pairs: Set[Tuple[int, int]]) -> Dict[int, Set[int]]:
    partners = {}
    for u, v in pool_pairs:
        if not H.has_edge(u, v):
            partners.setdefault(u, set()).add(v)
            partners.setdefault(v, set()).add(u)
    return partners


def _endpoints(engine: PosaEngine) -> Set[int]:
    ends = set(engine.endpoint_sets)
    for found in engine.endpoint_sets.values():
        ends |= found
    return ends


def _pool_search(engine: PosaEngine, P: List[int], partners: Dict[int, Set[int]]):
    # a pool edge that extends a rotation of P by an off-path vertex or closes one, with the longer path it gives
    n = engine.n
    members = set(P)
    leaving = any(engine._has_off(v, members) for v in P)

    def accept(Q):
        a, b = Q[0], Q[-1]
        for y in sorted(partners.get(b, ())):
            if y not in members:
                return (b, y), Q + [y]
        if a in partners.get(b, ()):
            if len(Q) == n:
                return (a, b), Q
            if leaving:
                return (a, b), engine._open_cycle(Q, members)
        return None

    engine.rounds = 0
    return engine.search(P, accept)


def _uses_edge(path: List[int], closed: bool, u: int, v: int) -> bool:
    steps = list(zip(path, path[1:]))
    if closed and len(path) > 2:
        steps.append((path[-1], path[0]))
    return any({a, b} == {u, v} for a, b in steps)


def _lookahead(H: MultiGraph, P: List[int], partners: Dict[int, Set[int]], ends: Set[int], s: SeedStream, budget: int, limit: int):
    """Pool edges at rotation endpoints, tried one by one; an edge is taken when the engine on H + e beats P through it."""
    cands = sorted({(min(b, y), max(b, y)) for b in ends for y in partners.get(b, ())})
    for u, v in cands[:limit]:
        state = PosaEngine(H.with_edges([(u, v)]), s, budget).run(path=P)
        if state.is_cycle or len(state.path) > len(P):
            # a longer path that avoids the edge lives in H already
            return ((u, v) if _uses_edge(state.path, state.is_cycle, u, v) else None), state.path
    return None


def booster_completion(
    H0: Graph,
    pool,
    s: Optional[SeedStream] = None,
    budget: Optional[int] = None,
    restarts: int = 3,
    lookahead: int = 64,
) -> metadata.CompletionResult:
    """booster_completion add pool edges that are boosters until the graph is Hamiltonian

    Each round takes the engine's best path P of H_i and looks for a pool
    edge that extends some rotation of P by an off-path vertex or closes it
    (a Hamilton cycle when P spans V, otherwise a cycle with an edge leaving
    it). Every search gets a fresh rotation budget and covers both levels of
    Pósa endpoints. When P has no such edge the search is repeated on paths
    from ``restarts`` random starts; a restart that beats P replaces it
    without an addition. As a last resort up to ``lookahead`` pool edges at
    the endpoints found are added tentatively (with a fifth of the budget),
    and one is kept when the engine then finds a longer path or a Hamilton
    cycle through it. Each
    accepted edge lengthens the best path, so at most n edges are added.

    Parameters
    ----------
    H0 : Graph
        starting graph
    pool : MultiGraph or iterable of pairs
        candidate edges (loops and multiplicities are ignored)
    s : SeedStream, optional
        randomness for the engine and the restart vertices
    budget : int, optional
        rotations per search, default 20 n
    restarts : int
        extra paths searched per round before the lookahead
    lookahead : int
        tentative additions per round

    Returns
    -------
    CompletionResult
        success flag, Hamilton cycle, added boosters and the final (or stuck) graph
    """
    s = s or SeedStream()
    H = simplify(H0) if isinstance(H0, MultiGraph) else H0.to_multigraph()
    n = H.n
    pool_pairs = _pool_pairs(pool)
    result = metadata.CompletionResult(graph=H)
    foreign = sum(1 for e in H.pairs() if e not in pool_pairs)
    result.foreign_edges.append(foreign)
    rng = s.child("completion", "restarts").generator()

    engine = PosaEngine(H, s.child("completion", 0), budget)
    state = engine.run()
    result.path_lengths.append(state.length)
    # additions and restart improvements both lengthen the path
    for _ in range(2 * n + 1):
        if state.is_cycle or n < 3:
            break
        partners = _pool_partners(H, pool_pairs)
        edge, path = None, None
        ends = set()
        for r in range(restarts + 1):
            current = state
            if r > 0:
                current = engine.run(int(rng.integers(1, n + 1)))
                if current.is_cycle or current.length > state.length:
                    path = current.path
                    break
                if current.length < state.length:
                    continue
            hit = _pool_search(engine, current.path, partners)
            ends |= _endpoints(engine)
            if hit is not None:
                edge, path = hit
                break
        if path is None:
            hit = _lookahead(H, state.path, partners, ends, s.child("completion", "lookahead"), max(1, engine.budget // 5), lookahead)
            if hit is None:
                break
            edge, path = hit
        if edge is None:
            state = engine.run(path=path)
            continue
        u, v = edge
        H = H.with_edges([(u, v)])
        result.added.append((min(u, v), max(u, v)))
        result.foreign_edges.append(foreign)
        engine = PosaEngine(H, s.child("completion", len(result.added)), budget)
        state = engine.run(path=path)
        result.path_lengths.append(state.length)
    if state.is_cycle and not result.success:
        result.success, result.cycle = True, state.path
    result.graph = H
    return result
