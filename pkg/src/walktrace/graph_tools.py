import math
import warnings
from collections import Counter, deque
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, Optional, Tuple, Union

import networkx as nx
import numpy as np
from scipy import sparse

from walktrace import metadata

VertexSet = FrozenSet[int]


def as_vertex_set(n: int, vertices: Iterable[int]) -> VertexSet:
    """as_vertex_set validate a collection of vertex labels against [n]

    Parameters
    ----------
    n : int
        number of vertices of the graph (labels are 1..n)
    vertices : Iterable[int]
        labels, duplicates are collapsed

    Returns
    -------
    VertexSet
        frozenset of labels
    """
    U = frozenset(int(v) for v in vertices)
    for v in U:
        if v < 1 or v > n:
            raise ValueError(f"Vertex {v} is outside 1..{n}.")
    return U


def _pair(u: int, v: int) -> Tuple[int, int]:
    return (u, v) if u <= v else (v, u)


class MultiGraph:
    """Vertex-labelled multigraph on [n] with edge multiplicities and loops.

    Immutable after construction. Vertex labels are 1..n and every
    vertex-indexed array has length n+1 with slot 0 unused.
    """

    def __init__(self, n: int, mult: Optional[Dict[Tuple[int, int], int]] = None, loops: Optional[Dict[int, int]] = None):
        if n < 0:
            raise ValueError(f"Vertex count must be non-negative, got n = {n}.")
        self.n = int(n)

        self._mult = {}
        for (u, v), m in (mult or {}).items():
            if u == v:
                raise ValueError(f"Loop ({u},{v}) passed as a pair; use loops instead.")
            if m < 0:
                raise ValueError(f"Negative multiplicity {m} for pair ({u},{v}).")
            if m > 0:
                self._mult[_pair(int(u), int(v))] = int(m)

        self._loops = np.zeros(self.n + 1, dtype=np.int64)
        for v, c in (loops or {}).items():
            if c < 0:
                raise ValueError(f"Negative loop count {c} at vertex {v}.")
            if not 1 <= v <= self.n:
                raise ValueError(f"Loop at {v} is outside 1..{self.n}.")
            self._loops[v] += c

        for u, v in self._mult:
            if u < 1 or v > self.n:
                raise ValueError(f"Edge ({u},{v}) is outside 1..{self.n}.")

        self._adj = [dict() for _ in range(self.n + 1)]
        for (u, v), m in self._mult.items():
            self._adj[u][v] = m
            self._adj[v][u] = m

        self._degree = np.zeros(self.n + 1, dtype=np.int64)
        for v in range(1, self.n + 1):
            self._degree[v] = sum(self._adj[v].values()) + 2 * self._loops[v]
        self.m_total = int(sum(self._mult.values()) + self._loops.sum())

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> "MultiGraph":
        """Build from an iterable of (u, v) pairs; repeated pairs add multiplicity, u == v adds a loop."""
        counts = Counter()
        loops = Counter()
        for u, v in edges:
            if u == v:
                loops[int(u)] += 1
            else:
                counts[_pair(int(u), int(v))] += 1
        return cls(n, dict(counts), dict(loops))

    @classmethod
    def from_arrays(cls, n: int, tails: np.ndarray, heads: np.ndarray) -> "MultiGraph":
        """Vectorised constructor used for traces: tails[i]-heads[i] is one edge instance."""
        tails = np.asarray(tails, dtype=np.int64)
        heads = np.asarray(heads, dtype=np.int64)
        if tails.shape != heads.shape:
            raise ValueError("tails and heads must have the same length.")
        if len(tails) == 0:
            return cls(n)
        lo = np.minimum(tails, heads)
        hi = np.maximum(tails, heads)
        if lo.min() < 1 or hi.max() > n:
            raise ValueError(f"Edge endpoints outside 1..{n}.")
        is_loop = lo == hi
        loop_counts = np.bincount(lo[is_loop], minlength=n + 1)
        keys, counts = np.unique(lo[~is_loop] * (n + 1) + hi[~is_loop], return_counts=True)
        mult = {(int(k // (n + 1)), int(k % (n + 1))): int(c) for k, c in zip(keys, counts)}
        loops = {int(v): int(c) for v, c in enumerate(loop_counts) if c > 0}
        return cls(n, mult, loops)

    def __repr__(self) -> str:
        return f"MultiGraph(n={self.n}, pairs={len(self._mult)}, loops={int(self._loops.sum())}, m_total={self.m_total})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return self.n == other.n and self._mult == other._mult and np.array_equal(self._loops, other._loops)

    def __hash__(self):
        return hash((self.n, frozenset(self._mult.items())))

    def mult(self, u: int, v: int) -> int:
        if u == v:
            return 0
        return self._mult.get(_pair(u, v), 0)

    def loops(self, v: int) -> int:
        return int(self._loops[v])

    def neighbors(self, v: int) -> Dict[int, int]:
        """Neighbour -> multiplicity (loops excluded)."""
        return self._adj[v]

    def degree(self, v: int) -> int:
        return int(self._degree[v])

    def simple_degree(self, v: int) -> int:
        return len(self._adj[v])

    def degree_array(self) -> np.ndarray:
        return self._degree.copy()

    def simple_degree_array(self) -> np.ndarray:
        return np.array([0] + [len(self._adj[v]) for v in range(1, self.n + 1)], dtype=np.int64)

    def pairs(self) -> Dict[Tuple[int, int], int]:
        """Distinct non-loop pairs (u < v) with their multiplicity."""
        return dict(self._mult)

    def edges(self) -> Iterator[Tuple[int, int, int]]:
        """(u, v, mult) per distinct edge with u <= v, loops as (v, v, count)."""
        for (u, v), m in sorted(self._mult.items()):
            yield u, v, m
        for v in np.flatnonzero(self._loops):
            yield int(v), int(v), int(self._loops[v])

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return self._loops[u] > 0
        return _pair(u, v) in self._mult

    @property
    def max_multiplicity(self) -> int:
        return max(self._mult.values(), default=0)

    def with_edges(self, edges: Iterable[Tuple[int, int]]) -> "MultiGraph":
        """A new graph with the extra edge instances added."""
        mult = Counter(self._mult)
        loops = Counter({int(v): int(c) for v, c in enumerate(self._loops) if c > 0})
        for u, v in edges:
            if u == v:
                loops[int(u)] += 1
            else:
                mult[_pair(int(u), int(v))] += 1
        return MultiGraph(self.n, dict(mult), dict(loops))

    @cached_property
    def _simple_nx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(1, self.n + 1))
        G.add_edges_from(self._mult.keys())
        return G

    def to_networkx(self) -> nx.Graph:
        """The simplified graph as a networkx Graph on nodes 1..n (cached, do not mutate)."""
        return self._simple_nx

    def adjacency_matrix(self, simple: bool = False) -> sparse.csr_matrix:
        """Symmetric (n x n) CSR matrix indexed by label-1; loops sit on the diagonal counted twice."""
        if self._mult:
            uv = np.array(list(self._mult.keys()), dtype=np.int64) - 1
            w = np.ones(len(uv)) if simple else np.array(list(self._mult.values()), dtype=float)
            rows = np.concatenate([uv[:, 0], uv[:, 1]])
            cols = np.concatenate([uv[:, 1], uv[:, 0]])
            data = np.concatenate([w, w])
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
            data = np.zeros(0)
        if not simple:
            lv = np.flatnonzero(self._loops)
            rows = np.concatenate([rows, lv - 1])
            cols = np.concatenate([cols, lv - 1])
            data = np.concatenate([data, 2.0 * self._loops[lv]])
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    @cached_property
    def stubs(self) -> Tuple[np.ndarray, np.ndarray]:
        """CSR half-edge table (indptr, targets) for multiplicity-proportional steps; a loop appears twice."""
        indptr = np.zeros(self.n + 2, dtype=np.int64)
        indptr[2:] = np.cumsum(self._degree[1:])
        targets = np.empty(int(self._degree.sum()), dtype=np.int64)
        for v in range(1, self.n + 1):
            pos = indptr[v]
            for u, m in sorted(self._adj[v].items()):
                targets[pos : pos + m] = u
                pos += m
            targets[pos : pos + 2 * self._loops[v]] = v
        return indptr, targets


class CompleteGraph:
    """Implicit K_n: no stored adjacency, so walks on K_n scale to large n."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"K_n needs n >= 1, got {n}.")
        self.n = int(n)
        self.m_total = self.n * (self.n - 1) // 2

    def __repr__(self) -> str:
        return f"CompleteGraph(n={self.n})"

    def __eq__(self, other) -> bool:
        if isinstance(other, CompleteGraph):
            return self.n == other.n
        return NotImplemented

    def __hash__(self):
        return hash(("K", self.n))

    def mult(self, u: int, v: int) -> int:
        return 0 if u == v else 1

    def loops(self, v: int) -> int:
        return 0

    def neighbors(self, v: int) -> Dict[int, int]:
        return {u: 1 for u in range(1, self.n + 1) if u != v}

    def degree(self, v: int) -> int:
        return self.n - 1

    simple_degree = degree

    def degree_array(self) -> np.ndarray:
        d = np.full(self.n + 1, self.n - 1, dtype=np.int64)
        d[0] = 0
        return d

    simple_degree_array = degree_array

    def has_edge(self, u: int, v: int) -> bool:
        return u != v

    @property
    def max_multiplicity(self) -> int:
        return 1 if self.n > 1 else 0

    def edges(self) -> Iterator[Tuple[int, int, int]]:
        for u in range(1, self.n + 1):
            for v in range(u + 1, self.n + 1):
                yield u, v, 1

    def pairs(self) -> Dict[Tuple[int, int], int]:
        return {(u, v): 1 for u, v, _ in self.edges()}

    def to_multigraph(self) -> MultiGraph:
        if self.n > 3000:
            warnings.warn(f"Materialising K_{self.n} stores {self.m_total} edges.")
        return MultiGraph(self.n, self.pairs())

    def to_networkx(self) -> nx.Graph:
        return nx.relabel_nodes(nx.complete_graph(self.n), {i: i + 1 for i in range(self.n)})

    def adjacency_matrix(self, simple: bool = False) -> sparse.csr_matrix:
        return sparse.csr_matrix(np.ones((self.n, self.n)) - np.eye(self.n))


Graph = Union[MultiGraph, CompleteGraph]


def simplify(G: Graph) -> Graph:
    """simplify collapse multi-edges to single edges and drop loops"""
    if isinstance(G, CompleteGraph):
        return G
    return MultiGraph(G.n, {e: 1 for e in G.pairs()})


def external_neighborhood(G: Graph, U: Iterable[int]) -> VertexSet:
    """external_neighborhood N_G(U): vertices outside U with a neighbour in U"""
    U = as_vertex_set(G.n, U)
    if not U:
        return frozenset()
    if isinstance(G, CompleteGraph):
        return frozenset(range(1, G.n + 1)) - U
    out = set()
    for u in U:
        out.update(G.neighbors(u))
    return frozenset(out - U)


def closed_neighborhood(G: Graph, U: Iterable[int]) -> VertexSet:
    """N⁺_G(U) = N_G(U) ∪ U"""
    U = as_vertex_set(G.n, U)
    return external_neighborhood(G, U) | U


def edge_boundary(G: Graph, S: Iterable[int]) -> int:
    """edge_boundary |∂_G S| counted with multiplicity"""
    S = as_vertex_set(G.n, S)
    if isinstance(G, CompleteGraph):
        return len(S) * (G.n - len(S))
    return sum(m for u in S for v, m in G.neighbors(u).items() if v not in S)


def edges_between(G: Graph, A: Iterable[int], B: Iterable[int]) -> int:
    """|E_G(A,B)|: edge instances with one end in A and the other in B (A, B disjoint)"""
    A = as_vertex_set(G.n, A)
    B = as_vertex_set(G.n, B)
    if A & B:
        raise ValueError("edges_between expects disjoint vertex sets.")
    if isinstance(G, CompleteGraph):
        return len(A) * len(B)
    small, large = (A, B) if len(A) <= len(B) else (B, A)
    return sum(m for u in small for v, m in G.neighbors(u).items() if v in large)


def ball(G: Graph, v: int, r: int) -> VertexSet:
    """ball B_G(v, r) by breadth-first search on the simplified graph

    Parameters
    ----------
    G : Graph
        base (multi)graph
    v : int
        centre
    r : int
        radius, r >= 0

    Returns
    -------
    VertexSet
        vertices at distance at most r from v
    """
    if r < 0:
        raise ValueError(f"Radius must be non-negative, got {r}.")
    as_vertex_set(G.n, [v])
    if isinstance(G, CompleteGraph):
        return frozenset([v]) if r == 0 else frozenset(range(1, G.n + 1))
    return frozenset(nx.single_source_shortest_path_length(G.to_networkx(), v, cutoff=r))


def neighbor_sphere(G: Graph, v: int, r: int) -> VertexSet:
    """N_G(v, r) = B(v, r) minus B(v, r-1)"""
    if r == 0:
        return frozenset([v])
    return ball(G, v, r) - ball(G, v, r - 1)


def distance(G: Graph, u: int, v: int) -> float:
    """d_G(u, v) on the simplified graph, math.inf when unreachable"""
    if u == v:
        return 0
    if isinstance(G, CompleteGraph):
        return 1
    try:
        return nx.shortest_path_length(G.to_networkx(), u, v)
    except nx.NetworkXNoPath:
        return math.inf


def degree_profile(G: Graph) -> metadata.DegreeProfile:
    """degree_profile δ, Δ on simple degrees plus per-vertex d and d'"""
    d = G.degree_array()
    ds = G.simple_degree_array()
    if G.n == 0:
        return metadata.DegreeProfile(0, 0, d, ds)
    return metadata.DegreeProfile(int(ds[1:].min()), int(ds[1:].max()), d, ds)


def write_graph(G: Graph, path: str) -> None:
    """Text format: header `n m` (m = number of edge lines), then `u v mult`, loops as `v v count`."""
    lines = [f"{u} {v} {m}" for u, v, m in G.edges()]
    with open(path, "w") as f:
        f.write(f"{G.n} {len(lines)}\n")
        for line in lines:
            f.write(line + "\n")


def read_graph(path: str) -> MultiGraph:
    with open(path, "r") as f:
        rows = [line.split() for line in f if line.strip() and not line.startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise ValueError(f"Graph file {path} has no `n m` header.")
    n, m = int(rows[0][0]), int(rows[0][1])
    if len(rows) - 1 != m:
        raise ValueError(f"Graph file {path} announces {m} edge lines, found {len(rows) - 1}.")
    mult, loops = {}, {}
    for row in rows[1:]:
        u, v, c = (int(x) for x in row)
        if u == v:
            loops[u] = loops.get(u, 0) + c
        else:
            key = _pair(u, v)
            mult[key] = mult.get(key, 0) + c
    return MultiGraph(n, mult, loops)


def bfs_grown_set(G: Graph, root: int, size: int, rng: np.random.Generator) -> VertexSet:
    """A connected vertex set of the requested size grown breadth-first from root (random tie order)."""
    seen = {root}
    queue = deque([root])
    while queue and len(seen) < size:
        u = queue.popleft()
        nbrs = list(G.neighbors(u))
        rng.shuffle(nbrs)
        for w in nbrs:
            if w not in seen:
                seen.add(w)
                queue.append(w)
                if len(seen) == size:
                    break
    return frozenset(seen)
