import math

import numpy as np
import pytest

from walktrace.random_models import SeedStream, complete_graph, sample_ghat, sample_gnp, sample_gnp_alpha


def test_seed_stream_is_reproducible():
    a = SeedStream(7, 3).child("walk").generator().random(5)
    b = SeedStream(7, 3).child("walk").generator().random(5)
    assert np.array_equal(a, b)


def test_seed_stream_children_differ():
    s = SeedStream(7, 3)
    assert not np.array_equal(s.child("walk").generator().random(5), s.child("audit").generator().random(5))
    assert not np.array_equal(s.generator().random(5), SeedStream(7, 4).generator().random(5))
    # deriving a child leaves the parent untouched
    assert s.child("x").path != s.path and s.path == ()


@pytest.mark.parametrize("master_seed, run_index", [(-1, 0), (2**64, 0), (0, -1)])
def test_seed_stream_rejects_bad_seeds(master_seed, run_index):
    with pytest.raises(ValueError):
        SeedStream(master_seed, run_index)


def test_gnp_extremes(seed):
    assert sample_gnp(10, 0.0, seed).m_total == 0
    G = sample_gnp(10, 1.0, seed)
    assert len(G.pairs()) == 45
    assert sample_gnp(1, 0.5, seed).m_total == 0


@pytest.mark.parametrize("p", [-0.1, 1.5, float("nan")])
def test_gnp_rejects_bad_p(p, seed):
    with pytest.raises(ValueError):
        sample_gnp(10, p, seed)


@pytest.mark.parametrize("n, p", [(400, 0.02), (120, 0.5)])
def test_gnp_edge_count(n, p, seed):
    # both the geometric-skip and the dense samplers
    G = sample_gnp(n, p, seed)
    N = n * (n - 1) // 2
    sd = math.sqrt(N * p * (1 - p))
    assert abs(len(G.pairs()) - N * p) < 6 * sd
    assert G.max_multiplicity == 1
    assert G.degree_array().sum() == 2 * len(G.pairs())


def test_gnp_is_reproducible():
    a = sample_gnp(200, 0.05, SeedStream(11, 2))
    b = sample_gnp(200, 0.05, SeedStream(11, 2))
    c = sample_gnp(200, 0.05, SeedStream(11, 3))
    assert a == b
    assert a != c


def test_gnp_alpha(seed):
    G = sample_gnp_alpha(500, 4.0, seed)
    p = 4.0 * math.log(500) / 500
    N = 500 * 499 // 2
    assert abs(len(G.pairs()) - N * p) < 6 * math.sqrt(N * p)
    with pytest.raises(ValueError):
        sample_gnp_alpha(10, 100.0, seed)


def test_ghat_keeps_every_draw(seed):
    G = sample_ghat(30, 500, seed)
    assert G.m_total == 500
    with pytest.raises(ValueError):
        sample_ghat(30, -1, seed)


def test_complete_graph():
    K = complete_graph(8)
    assert K.n == 8 and K.m_total == 28


@pytest.mark.parametrize("a, b", [("trace", "trace-expansion"), ("mixing", "mixing-starts"), ("completion-lookahead", "completion-lookaheads")])
def test_seed_stream_long_keys_do_not_collide(a, b):
    s = SeedStream(11, 0)
    assert not np.array_equal(s.child(a).generator().random(4), s.child(b).generator().random(4))
