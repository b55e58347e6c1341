from itertools import permutations

import pytest

from walktrace.expander_tools import largest_expansion_radius
from walktrace.graph_tools import CompleteGraph, MultiGraph
from walktrace.hamilton_tools import (
    PosaEngine,
    booster_completion,
    boosters,
    exact_hamilton_cycle,
    hamilton_paths_between,
    is_hamilton_cycle,
    is_hamiltonian,
    max_path_length,
    posa_longest_path,
)
from walktrace.metadata import EnumerationBudgetError
from walktrace.random_models import SeedStream, sample_gnp
from walktrace.structure_tools import is_connected


def hamiltonian_by_permutations(G: MultiGraph) -> bool:
    n = G.n
    if n < 3:
        return False
    for rest in permutations(range(2, n + 1)):
        if is_hamilton_cycle(G, (1,) + rest):
            return True
    return False


def test_small_families(path5, cycle6, petersen, k6):
    verdict = is_hamiltonian(cycle6)
    assert verdict.hamiltonian and verdict.exact
    assert is_hamilton_cycle(cycle6, verdict.cycle)
    assert not is_hamiltonian(path5)
    verdict = is_hamiltonian(petersen)
    assert not verdict.hamiltonian and verdict.exact
    assert is_hamiltonian(k6).cycle == [1, 2, 3, 4, 5, 6]
    assert not is_hamiltonian(CompleteGraph(2))


def test_is_hamilton_cycle_checks_the_witness(cycle6):
    assert is_hamilton_cycle(cycle6, [1, 2, 3, 4, 5, 6])
    assert not is_hamilton_cycle(cycle6, [1, 3, 2, 4, 5, 6])
    assert not is_hamilton_cycle(cycle6, [1, 2, 3, 4, 5])


def test_posa_finds_long_paths(path5, cycle6):
    state = posa_longest_path(path5)
    assert state.length == 4 and not state.is_cycle
    state = posa_longest_path(cycle6)
    assert state.is_cycle and sorted(state.path) == list(range(1, 7))


def test_rotation_endpoints(cycle6):
    engine = PosaEngine(cycle6)
    assert engine.rotate([1, 2, 3, 4, 5, 6], 0) == [1, 6, 5, 4, 3, 2]
    assert set(engine.rotation_endpoints([1, 2, 3, 4, 5, 6])) == {2, 6}
    K4 = MultiGraph.from_edges(4, [(u, v) for u in range(1, 5) for v in range(u + 1, 5)])
    ends = PosaEngine(K4).rotation_endpoints([1, 2, 3, 4])
    assert set(ends) == {2, 3, 4}
    assert all(Q[0] == 1 and Q[-1] == v for v, Q in ends.items())


def test_is_hamiltonian_agrees_with_exact_backtracking():
    disagreements = []
    for i in range(300):
        n = 5 + i % 10
        s = SeedStream(41, i)
        G = sample_gnp(n, 0.3 + 0.05 * (i % 7), s.child("model"))
        verdict = is_hamiltonian(G, s)
        if verdict.hamiltonian != (exact_hamilton_cycle(G) is not None):
            disagreements.append(i)
        if verdict.hamiltonian and not is_hamilton_cycle(G, verdict.cycle):
            disagreements.append(i)
    assert disagreements == []


def test_exact_search_agrees_with_permutations():
    for i in range(60):
        n = 4 + i % 4
        G = sample_gnp(n, 0.5, SeedStream(43, i))
        cycle = exact_hamilton_cycle(G)
        assert (cycle is not None) == hamiltonian_by_permutations(G)
        if cycle is not None:
            assert is_hamilton_cycle(G, cycle)


def test_max_path_length(path5, star, petersen):
    assert max_path_length(path5) == 4
    assert max_path_length(star) == 2
    assert max_path_length(petersen) == 9
    assert max_path_length(MultiGraph.from_edges(3, [])) == 0
    with pytest.raises(EnumerationBudgetError):
        max_path_length(MultiGraph(19))


def test_hamilton_paths_between(path5, cycle6):
    assert hamilton_paths_between(path5) == {(1, 5)}
    assert hamilton_paths_between(cycle6) == {(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 6)}


def test_boosters_of_small_graphs(path5, star):
    assert boosters(path5) == {(1, 5)}
    leaves = range(2, 7)
    assert boosters(star) == {(u, v) for u in leaves for v in leaves if u < v}
    with pytest.raises(ValueError):
        boosters(path5, mode="guess")


def test_exact_boosters_match_recomputation(petersen):
    graphs = [petersen] + [sample_gnp(8, 0.35, SeedStream(47, i)) for i in range(12)]
    for H in graphs:
        L = max_path_length(H)
        expected = set()
        for u in range(1, H.n + 1):
            for v in range(u + 1, H.n + 1):
                if H.has_edge(u, v):
                    continue
                G = H.with_edges([(u, v)])
                if is_hamiltonian(G).hamiltonian or max_path_length(G) > L:
                    expected.add((u, v))
        if is_hamiltonian(H).hamiltonian:
            continue
        assert boosters(H) == expected


def test_sampled_boosters_are_boosters(path5, star, seed):
    for H in (path5, star):
        assert boosters(H, mode="sampled", samples=50, s=seed) <= boosters(H)


def test_booster_completion(path5, star, seed):
    pool = CompleteGraph(5)
    result = booster_completion(path5, pool, seed)
    assert result.success
    assert is_hamilton_cycle(result.graph, result.cycle)
    assert result.added == [(1, 5)]
    assert result.foreign_edges == [0, 0]

    result = booster_completion(star, CompleteGraph(6), seed)
    assert result.success
    assert len(result.added) <= 6
    assert is_hamilton_cycle(result.graph, result.cycle)
    # the result graph only grows from H0 by pool edges
    assert set(star.pairs()) <= set(result.graph.pairs())

    result = booster_completion(path5, [], seed)
    assert not result.success
    assert result.added == []
    assert result.foreign_edges == [4]


def test_expanders_have_many_boosters():
    checked = 0
    for i in range(200):
        H = sample_gnp(10, 0.25 + 0.03 * (i % 6), SeedStream(83, i))
        if not is_connected(H) or is_hamiltonian(H).hamiltonian:
            continue
        R = largest_expansion_radius(H, 2)
        if R < 1:
            continue
        checked += 1
        assert len(boosters(H)) >= (R + 1) ** 2 / 2
    assert checked > 0


def random_out_graph(n, d, s):
    rng = s.generator()
    edges = []
    for v in range(1, n + 1):
        others = [u for u in range(1, n + 1) if u != v]
        edges += [(v, int(u)) for u in rng.choice(others, size=d, replace=False)]
    return MultiGraph.from_edges(n, edges)


def test_booster_completion_on_sparse_starts():
    completed = 0
    for i in range(10):
        s = SeedStream(89, i)
        H0 = random_out_graph(60, 2, s.child("H0"))
        pool = sample_gnp(60, 0.1, s.child("pool"))
        result = booster_completion(H0, pool, s)
        # every accepted edge comes from the pool and lengthens the best path
        assert set(result.added) <= set(pool.pairs())
        assert all(a < b for a, b in zip(result.path_lengths, result.path_lengths[1:]))
        assert len(result.added) <= 60
        if result.success:
            completed += 1
            assert is_hamilton_cycle(result.graph, result.cycle)
    assert completed >= 8


def test_booster_completion_with_a_tiny_rotation_budget(seed):
    # path 1..6 with the chord 3-6: the only rotation gives the end 4, and 1-4 closes 1,2,3,6,5,4
    H0 = MultiGraph.from_edges(6, [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (3, 6)])
    result = booster_completion(H0, [(1, 4)], seed, budget=1)
    assert result.success and result.added == [(1, 4)]
    assert is_hamilton_cycle(result.graph, result.cycle)


@pytest.mark.slow
def test_expanders_have_many_boosters_on_many_graphs():
    checked = 0
    for i in range(8000):
        if checked == 200:
            break
        H = sample_gnp(10, 0.28 + 0.02 * (i % 5), SeedStream(101, i))
        if not is_connected(H) or is_hamiltonian(H).hamiltonian:
            continue
        R = largest_expansion_radius(H, 2)
        if R < 1:
            continue
        checked += 1
        assert len(boosters(H)) >= (R + 1) ** 2 / 2
    assert checked == 200
