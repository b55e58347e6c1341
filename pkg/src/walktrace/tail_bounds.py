"""Deviation bounds for binomial and hypergeometric counts, and the cover-time window on K_n.

Every bound is evaluated in log-space; the ``log_*`` functions return the
natural log of the bound and the plain functions clip exp(log) to [0, 1].
"""
import math
from typing import Optional, Tuple

import numpy as np
from scipy import special, stats

VARIANTS = (
    "chernoff_lower",
    "chernoff_upper",
    "chernoff_lower_simple",
    "chernoff_upper_simple",
    "corollary_lower",
    "corollary_upper",
    "trivial",
    "trivial_simple",
)


def phi(x: float) -> float:
    """φ(x) = (1+x) ln(1+x) - x for x >= -1 (φ(-1) = 1) and +inf below -1."""
    if x < -1:
        return math.inf
    if x == -1:
        return 1.0
    return (1 + x) * math.log1p(x) - x


def _check_binomial(n: int, p: float) -> float:
    if n < 0:
        raise ValueError(f"Number of trials must be non-negative, got n = {n}.")
    if not 0 <= p <= 1:
        raise ValueError(f"Success probability must lie in [0,1], got p = {p}.")
    return n * p


def log_chernoff_lower(mu: float, a: float) -> float:
    """log P[X <= mu - a] <= -mu φ(-a/mu)"""
    if a < 0:
        raise ValueError(f"Deviation must be non-negative, got a = {a}.")
    if a == 0 or mu == 0:
        return 0.0
    return -mu * phi(-a / mu)


def log_chernoff_upper(mu: float, a: float) -> float:
    """log P[X >= mu + a] <= -mu φ(a/mu)"""
    if a < 0:
        raise ValueError(f"Deviation must be non-negative, got a = {a}.")
    if a == 0:
        return 0.0
    if mu == 0:
        return -math.inf
    return -mu * phi(a / mu)


def log_chernoff_lower_simple(mu: float, a: float) -> float:
    """log of exp(-a²/2mu)"""
    if a < 0:
        raise ValueError(f"Deviation must be non-negative, got a = {a}.")
    if a == 0 or mu == 0:
        return 0.0
    return -(a * a) / (2 * mu)


def log_chernoff_upper_simple(mu: float, a: float) -> float:
    """log of exp(-a²/(2(mu + a/3)))"""
    if a < 0:
        raise ValueError(f"Deviation must be non-negative, got a = {a}.")
    if a == 0:
        return 0.0
    return -(a * a) / (2 * (mu + a / 3))


def log_corollary_lower(mu: float, alpha: float, c: float) -> float:
    """log P[X <= alpha mu] <= -mu(1 - e^{-c} - alpha c), any c > 0"""
    if c <= 0:
        raise ValueError(f"The corollary needs c > 0, got c = {c}.")
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}.")
    return min(0.0, -mu * (1 - math.exp(-c) - alpha * c))


def log_corollary_upper(mu: float, beta: float, c: float) -> float:
    """log P[X >= beta mu] <= -mu(1 - e^{c} + beta c), any c > 0"""
    if c <= 0:
        raise ValueError(f"The corollary needs c > 0, got c = {c}.")
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}.")
    return min(0.0, -mu * (1 - math.exp(c) + beta * c))


def log_trivial(n: int, p: float, k: int) -> float:
    """log of C(n,k) p^k, an upper bound on P[X >= k]"""
    if k < 0 or k > n:
        raise ValueError(f"k must lie in 0..{n}, got {k}.")
    if k == 0:
        return 0.0
    if p == 0:
        return -math.inf
    lb = special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)
    return min(0.0, float(lb + k * math.log(p)))


def log_trivial_simple(n: int, p: float, k: int) -> float:
    """log of (enp/k)^k"""
    if k < 0 or k > n:
        raise ValueError(f"k must lie in 0..{n}, got {k}.")
    if k == 0:
        return 0.0
    if p == 0:
        return -math.inf
    return min(0.0, k * (1 + math.log(n * p / k)))


def binomial_tail_bounds(n: int, p: float, k: int, variant: str, c: Optional[float] = None) -> float:
    """binomial_tail_bounds evaluate one bound variant on a tail of X ~ Bin(n,p)

    Lower variants bound P[X <= k], upper and trivial variants bound
    P[X >= k]. Corollary variants take the free parameter c (default: the
    minimiser over a grid of c values, any c > 0 gives a valid bound).

    Parameters
    ----------
    n : int
        number of trials
    p : float
        success probability
    k : int
        tail threshold
    variant : str
        one of VARIANTS
    c : float, optional
        corollary parameter

    Returns
    -------
    float
        the bound, clipped to [0, 1]
    """
    mu = _check_binomial(n, p)
    if variant not in VARIANTS:
        raise ValueError(f"Unknown bound variant '{variant}', expected one of {VARIANTS}.")
    if variant in ("chernoff_lower", "chernoff_lower_simple", "corollary_lower"):
        if k >= mu:
            return 1.0
        a = mu - k
        if variant == "chernoff_lower":
            lg = log_chernoff_lower(mu, a)
        elif variant == "chernoff_lower_simple":
            lg = log_chernoff_lower_simple(mu, a)
        else:
            alpha = k / mu
            lg = log_corollary_lower(mu, alpha, c) if c is not None else min(log_corollary_lower(mu, alpha, cc) for cc in _C_GRID)
    elif variant in ("chernoff_upper", "chernoff_upper_simple", "corollary_upper"):
        if k <= mu:
            return 1.0
        a = k - mu
        if variant == "chernoff_upper":
            lg = log_chernoff_upper(mu, a)
        elif variant == "chernoff_upper_simple":
            lg = log_chernoff_upper_simple(mu, a)
        else:
            if mu == 0:
                return 0.0
            beta = k / mu
            lg = log_corollary_upper(mu, beta, c) if c is not None else min(log_corollary_upper(mu, beta, cc) for cc in _C_GRID)
    elif variant == "trivial":
        lg = log_trivial(n, p, k)
    else:
        lg = log_trivial_simple(n, p, k)
    return float(min(1.0, math.exp(lg)))


_C_GRID = tuple(np.geomspace(1e-3, 50, 200))


def hypergeometric_tail_bounds(N: int, K: int, n: int, k: int, variant: str) -> float:
    """Chernoff variants for a hypergeometric count (n draws, K marked out of N), mu = nK/N."""
    if not (0 <= K <= N and 0 <= n <= N):
        raise ValueError(f"Invalid hypergeometric parameters N={N}, K={K}, n={n}.")
    if variant not in VARIANTS[:4]:
        raise ValueError(f"Hypergeometric tails support only the Chernoff variants, got '{variant}'.")
    mu = n * K / N if N else 0.0
    if variant.startswith("chernoff_lower"):
        if k >= mu:
            return 1.0
        fn = log_chernoff_lower if variant == "chernoff_lower" else log_chernoff_lower_simple
        return float(min(1.0, math.exp(fn(mu, mu - k))))
    if k <= mu:
        return 1.0
    fn = log_chernoff_upper if variant == "chernoff_upper" else log_chernoff_upper_simple
    return float(min(1.0, math.exp(fn(mu, k - mu))))


def exact_tail(n: int, p: float, k: int, side: str = "upper") -> float:
    """Exact P[X >= k] (side='upper') or P[X <= k] (side='lower') for X ~ Bin(n,p)."""
    _check_binomial(n, p)
    if n > 1000:
        raise ValueError(f"exact_tail is meant for n <= 1000, got n = {n}.")
    if side == "upper":
        return float(stats.binom.sf(k - 1, n, p))
    if side == "lower":
        return float(stats.binom.cdf(k, n, p))
    raise ValueError(f"side must be 'upper' or 'lower', got '{side}'.")


def exact_hypergeom_tail(N: int, K: int, n: int, k: int, side: str = "upper") -> float:
    if side == "upper":
        return float(stats.hypergeom.sf(k - 1, N, K, n))
    if side == "lower":
        return float(stats.hypergeom.cdf(k, N, K, n))
    raise ValueError(f"side must be 'upper' or 'lower', got '{side}'.")


def cover_window(n: int, k: int = 1) -> Tuple[float, float]:
    """cover_window (t_-, t_+) = n(ln n + (k-1) ln ln n ∓ ln ln ln n)"""
    if n < 16:
        raise ValueError(f"cover_window needs n >= 16 so that ln ln ln n > 0, got n = {n}.")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}.")
    L = math.log(n)
    LL = math.log(L)
    LLL = math.log(LL)
    centre = L + (k - 1) * LL
    return n * (centre - LLL), n * (centre + LLL)
