from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx
from networkx.algorithms.connectivity import build_auxiliary_node_connectivity, local_node_connectivity
from networkx.algorithms.flow import build_residual_network

from walktrace.graph_tools import CompleteGraph, Graph, VertexSet

Matching = Set[Tuple[int, int]]


def _is_complete(G: Graph) -> bool:
    return isinstance(G, CompleteGraph) or len(G.pairs()) == G.n * (G.n - 1) // 2


def is_connected(G: Graph) -> bool:
    """is_connected connectivity of the simplified graph; K_1 (and the empty graph) count as connected"""
    if G.n <= 1 or isinstance(G, CompleteGraph):
        return True
    return nx.is_connected(G.to_networkx())


def vertex_connectivity(G: Graph) -> int:
    """vertex_connectivity exact κ of the simplified graph, κ(K_n) = n - 1"""
    if G.n <= 1:
        return 0
    if _is_complete(G):
        return G.n - 1
    return nx.node_connectivity(G.to_networkx())


def min_vertex_cut(G: Graph) -> Optional[VertexSet]:
    """A minimum separating vertex set, None for complete graphs (they have none)."""
    if G.n <= 1 or _is_complete(G):
        return None
    H = G.to_networkx()
    if not nx.is_connected(H):
        return frozenset()
    return frozenset(nx.minimum_node_cut(H))


def is_k_connected(G: Graph, k: int) -> bool:
    """is_k_connected decide κ(G) >= k with early exit

    Fixes a vertex v of minimum degree and runs unit-capacity flows, cut off
    at k augmenting paths, from v to every non-neighbour and between
    non-adjacent pairs of neighbours of v. The flow networks are the
    vertex-split auxiliary digraph and its residual, built once.

    Parameters
    ----------
    G : Graph
        graph, simplified internally
    k : int
        target connectivity

    Returns
    -------
    bool
        True iff G has more than k vertices and no separating set of size < k
    """
    if k <= 0:
        return True
    n = G.n
    if n <= k:
        return False
    if isinstance(G, CompleteGraph):
        return True
    H = G.to_networkx()
    degrees = dict(H.degree())
    v = min(degrees, key=lambda x: (degrees[x], x))
    if degrees[v] < k:
        return False
    if not nx.is_connected(H):
        return False
    if k == 1:
        return True

    aux = build_auxiliary_node_connectivity(H)
    residual = build_residual_network(aux, "capacity")

    def enough(x, y) -> bool:
        return local_node_connectivity(H, x, y, auxiliary=aux, residual=residual, cutoff=k) >= k

    nbrs = set(H[v])
    for w in sorted(set(H) - nbrs - {v}):
        if not enough(v, w):
            return False
    for x, y in combinations(sorted(nbrs), 2):
        if y not in H[x] and not enough(x, y):
            return False
    return True


def has_perfect_matching(G: Graph) -> Tuple[bool, Matching]:
    """has_perfect_matching maximum-cardinality blossom matching, with the matching as witness

    Returns
    -------
    Tuple[bool, Matching]
        (True, perfect matching) or (False, a maximum matching found so far)
    """
    n = G.n
    if n == 0:
        return True, set()
    if n % 2 == 1:
        return False, set()
    if isinstance(G, CompleteGraph):
        return True, {(2 * i + 1, 2 * i + 2) for i in range(n // 2)}
    if min(G.simple_degree_array()[1:]) == 0:
        return False, set()
    M = nx.max_weight_matching(G.to_networkx(), maxcardinality=True)
    M = {(min(u, v), max(u, v)) for u, v in M}
    return len(M) == n // 2, M


def is_perfect_matching(G: Graph, M: Iterable[Tuple[int, int]]) -> bool:
    """Witness check: pairwise disjoint edges of G covering every vertex."""
    covered = set()
    count = 0
    for u, v in M:
        if u == v or not G.has_edge(u, v) or u in covered or v in covered:
            return False
        covered.update((u, v))
        count += 1
    return len(covered) == G.n and 2 * count == G.n


def is_hamilton_path(G: Graph, path: Sequence[int]) -> bool:
    return len(path) == G.n and len(set(path)) == G.n and all(G.has_edge(a, b) for a, b in zip(path, path[1:]))


def matching_from_hamilton_path(path: Sequence[int], G: Optional[Graph] = None) -> List[Tuple[int, int]]:
    """matching_from_hamilton_path every second edge of the path, starting from the last edge

    Parameters
    ----------
    path : Sequence[int]
        Hamilton path, as a vertex sequence
    G : Graph, optional
        when given, the path is verified to be a Hamilton path of G

    Returns
    -------
    List[Tuple[int, int]]
        the n/2 matching edges, last edge first
    """
    path = list(path)
    if len(path) % 2 == 1:
        raise ValueError(f"A perfect matching needs an even number of vertices, got {len(path)}.")
    if len(set(path)) != len(path):
        raise ValueError("The path repeats a vertex.")
    if G is not None and not is_hamilton_path(G, path):
        raise ValueError("The sequence is not a Hamilton path of the graph.")
    return [(path[i - 1], path[i]) for i in range(len(path) - 1, 0, -2)]
