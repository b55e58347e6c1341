import math
import zlib
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from walktrace.graph_tools import CompleteGraph, MultiGraph

# pairs handled per chunk by the dense Bernoulli sampler
_DENSE_CHUNK = 1 << 22


@dataclass(frozen=True)
class SeedStream:
    """Reproducible source of randomness for one run.

    The generator state is a pure function of (master_seed, run_index, path),
    so runs can be scheduled in any order or in parallel. ``child`` derives
    named sub-streams (walk, restarts, audits, ...) without consuming the
    parent.
    """

    master_seed: int = 0
    run_index: int = 0
    path: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.master_seed < 0 or self.master_seed >= 2**64:
            raise ValueError(f"master_seed must be an unsigned 64-bit integer, got {self.master_seed}.")
        if self.run_index < 0:
            raise ValueError(f"run_index must be non-negative, got {self.run_index}.")

    def child(self, *keys) -> "SeedStream":
        return SeedStream(self.master_seed, self.run_index, self.path + tuple(_key(k) for k in keys))

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master_seed, spawn_key=(self.run_index,) + self.path)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))


def _key(k) -> int:
    if isinstance(k, (int, np.integer)):
        return int(k)
    # stable across interpreters (hash() of str is salted)
    return zlib.crc32(str(k).encode())


def _check_p(p: float) -> None:
    if not 0 <= p <= 1 or math.isnan(p):
        raise ValueError(f"Edge probability must lie in [0,1], got p = {p}.")


def _pair_from_index(idx: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    # pairs (u,v), 1 <= u < v <= n, in row-major order: row u holds n-u pairs
    idx = idx.astype(np.float64)
    m = 2 * n - 1
    u0 = np.floor((m - np.sqrt(m * m - 8 * idx)) / 2).astype(np.int64)
    start = u0 * (2 * n - u0 - 1) // 2
    # float rounding can misplace the row by one
    over = start > idx
    u0[over] -= 1
    start = u0 * (2 * n - u0 - 1) // 2
    under = idx - start >= n - 1 - u0
    u0[under] += 1
    start = u0 * (2 * n - u0 - 1) // 2
    v0 = u0 + 1 + (idx.astype(np.int64) - start)
    return u0 + 1, v0 + 1


def sample_gnp(n: int, p: float, s: SeedStream) -> MultiGraph:
    """sample_gnp binomial random graph G(n,p)

    Parameters
    ----------
    n : int
        number of vertices, n >= 1
    p : float
        edge probability in [0,1]
    s : SeedStream
        randomness for this draw

    Returns
    -------
    MultiGraph
        simple graph, each pair present independently with probability p
    """
    if n < 1:
        raise ValueError(f"G(n,p) needs n >= 1, got {n}.")
    _check_p(p)
    N = n * (n - 1) // 2
    if p == 0 or N == 0:
        return MultiGraph(n)
    rng = s.generator()
    if p < 0.1:
        # geometric skipping: gaps between present pairs are Geometric(p)
        chosen = []
        pos = -1
        expected = int(N * p + 6 * math.sqrt(N * p) + 16)
        while True:
            gaps = rng.geometric(p, size=expected)
            idx = pos + np.cumsum(gaps)
            keep = idx[idx < N]
            chosen.append(keep)
            if len(keep) < len(idx):
                break
            pos = int(idx[-1])
        idx = np.concatenate(chosen)
    else:
        parts = []
        for lo in range(0, N, _DENSE_CHUNK):
            hi = min(N, lo + _DENSE_CHUNK)
            parts.append(lo + np.flatnonzero(rng.random(hi - lo) < p))
        idx = np.concatenate(parts)
    u, v = _pair_from_index(idx, n)
    return MultiGraph.from_arrays(n, u, v)


def sample_gnp_alpha(n: int, alpha: float, s: SeedStream) -> MultiGraph:
    """G(n,p) with p = alpha ln n / n."""
    if n < 2:
        raise ValueError(f"The alpha parameterisation needs n >= 2, got {n}.")
    p = alpha * math.log(n) / n
    if p > 1:
        raise ValueError(f"alpha = {alpha} gives p = {p:.4f} > 1 at n = {n}.")
    return sample_gnp(n, p, s)


def sample_ghat(n: int, m: int, s: SeedStream) -> MultiGraph:
    """Ĝ(n,m): m independent uniform draws over the n² directed pairs, orientation dropped, loops kept."""
    if n < 1:
        raise ValueError(f"Ĝ(n,m) needs n >= 1, got {n}.")
    if m < 0:
        raise ValueError(f"Number of draws must be non-negative, got m = {m}.")
    rng = s.generator()
    u = rng.integers(1, n + 1, size=m)
    v = rng.integers(1, n + 1, size=m)
    return MultiGraph.from_arrays(n, u, v)


def complete_graph(n: int) -> CompleteGraph:
    return CompleteGraph(n)
