import math

import numpy as np
import pytest

from walktrace.graph_tools import MultiGraph
from walktrace.metadata import EnumerationBudgetError
from walktrace.mixing_tools import (
    buffer_bound,
    conductance,
    empirical_mixing_time,
    evolve,
    js_bound,
    js_reference,
    point_mass,
    sampled_phi,
    stationary_distribution,
    stationary_mass,
    tv_distance,
    tv_distance_sup,
)
from walktrace.random_models import SeedStream, sample_gnp


def test_stationary_distribution(path5, k6):
    pi = stationary_distribution(path5)
    assert pi[0] == 0
    assert list(pi[1:]) == pytest.approx([1 / 8, 2 / 8, 2 / 8, 2 / 8, 1 / 8])
    assert stationary_mass(stationary_distribution(k6), range(1, 7)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        stationary_distribution(MultiGraph(4))


def test_loops_count_twice_in_the_stationary_law():
    G = MultiGraph.from_edges(2, [(1, 2), (2, 2)])
    assert list(stationary_distribution(G)[1:]) == pytest.approx([1 / 4, 3 / 4])


def test_evolve_keeps_mass_and_fixes_pi(petersen):
    mu = evolve(petersen, point_mass(10, 1), 500)
    assert math.fsum(mu) == pytest.approx(1.0, abs=1e-12)
    pi = stationary_distribution(petersen)
    assert np.allclose(evolve(petersen, pi, 50), pi)
    assert np.array_equal(evolve(petersen, point_mass(10, 3), 0), point_mass(10, 3))


def test_evolve_rejections(path5):
    with pytest.raises(ValueError):
        evolve(path5, point_mass(5, 1), -1)
    with pytest.raises(ValueError):
        evolve(path5, np.array([0, 0.5, 0.4, 0, 0, 0]), 3)
    with pytest.raises(ValueError):
        evolve(path5, point_mass(4, 1), 3)


def test_one_lazy_step_on_a_path(path5):
    mu = evolve(path5, point_mass(5, 1), 1)
    assert list(mu[1:]) == pytest.approx([0.5, 0.5, 0, 0, 0])


def test_tv_definitions_agree():
    rng = np.random.default_rng(61)
    for n in range(1, 13):
        mu = np.concatenate([[0], rng.dirichlet(np.ones(n))])
        nu = np.concatenate([[0], rng.dirichlet(np.ones(n))])
        value, S = tv_distance_sup(mu, nu)
        assert tv_distance(mu, nu) == pytest.approx(value, abs=1e-12)
        assert abs(sum(mu[v] - nu[v] for v in S)) == pytest.approx(value, abs=1e-12)
    with pytest.raises(EnumerationBudgetError):
        tv_distance_sup(np.zeros(22), np.zeros(22))


def test_conductance(path5, seed):
    assert conductance(path5, {1, 2}) == pytest.approx(1 / 6)
    assert conductance(path5, {1, 2, 3, 4}) == pytest.approx(1 / 2)
    with pytest.raises(ValueError):
        conductance(path5, set())
    with pytest.raises(ValueError):
        conductance(path5, range(1, 6))
    phi, S = sampled_phi(path5, samples=40, s=seed)
    assert phi == pytest.approx(conductance(path5, S))
    assert phi <= 1 / 2


def test_reference_bounds():
    n, xi = 1000, 0.25
    assert js_bound(1 / 30, 5 / (8 * n), xi) <= js_reference(n, xi)
    assert js_reference(n, xi) == pytest.approx(1800 * math.log(8000))
    assert buffer_bound(n) == pytest.approx(3601 * math.log(n))
    with pytest.raises(ValueError):
        js_bound(0, 0.1, 0.1)
    with pytest.raises(ValueError):
        js_bound(0.5, 0.1, 1.0)


def test_empirical_mixing_time(petersen, seed):
    result = empirical_mixing_time(petersen, 0.25, seed)
    assert result.regime == "exact" and result.starts == 10
    assert result.steps is not None and result.steps > 0
    assert result.monotone
    assert result.tv_history[-1] < 0.25 <= result.tv_history[-2]
    with pytest.raises(ValueError):
        empirical_mixing_time(petersen, 1.5)


def test_mixing_gives_up_on_disconnected_graphs(seed):
    G = MultiGraph.from_edges(4, [(1, 2), (3, 4)])
    result = empirical_mixing_time(G, 0.25, seed, max_steps=50)
    assert result.steps is None
    assert len(result.tv_history) == 51


@pytest.mark.slow
def test_mixing_time_of_dense_gnp_is_within_the_buffer(seed):
    n = 2000
    G = sample_gnp(n, 0.05, SeedStream(67))
    result = empirical_mixing_time(G, 1 / n, seed)
    assert result.regime == "sampled"
    assert result.steps is not None
    assert result.steps <= buffer_bound(n)


def test_two_state_chain_mixes_in_one_step():
    # one half-lazy step on K_2 lands exactly on (1/2, 1/2)
    K2 = MultiGraph.from_edges(2, [(1, 2)])
    assert empirical_mixing_time(K2, 0.1).steps == 1
    assert list(evolve(K2, point_mass(2, 2), 1)[1:]) == pytest.approx([0.5, 0.5])


def test_conductance_examples(k6):
    K4 = MultiGraph.from_edges(4, [(u, v) for u in range(1, 5) for v in range(u + 1, 5)])
    assert conductance(K4, {1, 2}) == pytest.approx(1 / 3)
    G = MultiGraph.from_edges(4, [(1, 2), (3, 4)])
    assert conductance(G, {1, 2}) == 0
    assert conductance(k6, {1, 4}) == pytest.approx(conductance(k6, {2, 3, 5, 6}))


def test_mass_is_held_to_1e_12(petersen):
    mu = point_mass(10, 1)
    mu[2] += 1e-10
    with pytest.raises(ValueError):
        evolve(petersen, mu, 1)
    mu = evolve(petersen, point_mass(10, 1), 2000)
    assert abs(math.fsum(mu) - 1) <= 1e-12
