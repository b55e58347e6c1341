import math

import pytest

from walktrace import tail_bounds
from walktrace.tail_bounds import VARIANTS, binomial_tail_bounds, cover_window, exact_hypergeom_tail, exact_tail, hypergeometric_tail_bounds, phi

LOWER = ("chernoff_lower", "chernoff_lower_simple", "corollary_lower")


def test_phi():
    assert phi(0) == 0
    assert phi(-1) == 1
    assert phi(-2) == math.inf
    assert phi(1) == pytest.approx(2 * math.log(2) - 1)


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5])
def test_every_variant_dominates_the_exact_tail(p):
    violations = []
    for n in range(1, 31):
        for k in range(0, n + 1):
            for variant in VARIANTS:
                side = "lower" if variant in LOWER else "upper"
                bound = binomial_tail_bounds(n, p, k, variant)
                exact = exact_tail(n, p, k, side)
                if bound < exact - 1e-12:
                    violations.append((n, k, variant, bound, exact))
    assert violations == []


def test_corollary_accepts_any_c():
    for c in (0.01, 0.5, 3.0):
        assert binomial_tail_bounds(30, 0.5, 25, "corollary_upper", c) >= exact_tail(30, 0.5, 25, "upper")
        assert binomial_tail_bounds(30, 0.5, 5, "corollary_lower", c) >= exact_tail(30, 0.5, 5, "lower")
    with pytest.raises(ValueError):
        tail_bounds.log_corollary_upper(10, 2, 0)


def test_bounds_are_probabilities():
    assert binomial_tail_bounds(20, 0.5, 10, "chernoff_upper") == 1.0
    assert binomial_tail_bounds(20, 0.5, 15, "chernoff_lower") == 1.0
    assert 0 < binomial_tail_bounds(1000, 0.5, 700, "chernoff_upper") < 1e-8


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        binomial_tail_bounds(10, 0.5, 3, "markov")
    with pytest.raises(ValueError):
        binomial_tail_bounds(10, 1.5, 3, "chernoff_upper")
    with pytest.raises(ValueError):
        exact_tail(10, 0.5, 3, "middle")


def test_hypergeometric_bounds_dominate():
    N, K, n = 40, 15, 12
    for k in range(0, n + 1):
        assert hypergeometric_tail_bounds(N, K, n, k, "chernoff_upper") >= exact_hypergeom_tail(N, K, n, k, "upper") - 1e-12
        assert hypergeometric_tail_bounds(N, K, n, k, "chernoff_lower") >= exact_hypergeom_tail(N, K, n, k, "lower") - 1e-12
    with pytest.raises(ValueError):
        hypergeometric_tail_bounds(N, K, n, 3, "trivial")


def test_cover_window():
    n = 1000
    lo, hi = cover_window(n)
    L = math.log(n)
    assert lo < n * L < hi
    assert hi - lo == pytest.approx(2 * n * math.log(math.log(L)))
    lo2, hi2 = cover_window(n, 2)
    assert lo2 == pytest.approx(lo + n * math.log(L))
    with pytest.raises(ValueError):
        cover_window(10)
