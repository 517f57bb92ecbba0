"""Graph families used in the examples and tests.

All random generators take an explicit seed and are pure functions of their
arguments.
"""
from __future__ import annotations

import math

import numpy as np

from .graph import DisconnectedGraphError, GraphError, WeightedGraph, is_connected


class DisconnectedSampleError(DisconnectedGraphError):
    """A random geometric sample came out disconnected; ``graph`` holds it."""

    def __init__(self, message, graph):
        super().__init__(message)
        self.graph = graph


def _check_n(n):
    if n < 2:
        raise GraphError(f"need n >= 2, got {n}")


def complete(n: int, w: float = 1.0) -> WeightedGraph:
    _check_n(n)
    i, j = np.triu_indices(n, 1)
    return WeightedGraph._from_arrays(n, i, j, np.full(i.size, float(w)))


def path(n: int, w: float = 1.0) -> WeightedGraph:
    _check_n(n)
    i = np.arange(n - 1)
    return WeightedGraph._from_arrays(n, i, i + 1, np.full(n - 1, float(w)))


def cycle(n: int, w: float = 1.0) -> WeightedGraph:
    if n < 3:
        raise GraphError(f"cycle needs n >= 3, got {n}")
    edges = [(k, (k + 1) % n, w) for k in range(n)]
    return WeightedGraph.from_edges(n, edges)


def star(n: int, w: float = 1.0) -> WeightedGraph:
    """Node 0 joined to every other node."""
    _check_n(n)
    j = np.arange(1, n)
    return WeightedGraph._from_arrays(n, np.zeros(n - 1, dtype=np.int64), j, np.full(n - 1, float(w)))


def gnm_random(n: int, m: int, seed) -> WeightedGraph:
    """``m`` distinct unit-weight links drawn uniformly without replacement."""
    _check_n(n)
    total = n * (n - 1) // 2
    if not 0 <= m <= total:
        raise GraphError(f"m={m} infeasible for n={n} (max {total})")
    rng = np.random.default_rng(seed)
    pick = np.sort(rng.choice(total, size=m, replace=False))
    i, j = np.triu_indices(n, 1)
    return WeightedGraph._from_arrays(n, i[pick], j[pick], np.ones(m))


def two_component_cut(n_half: int, m_half: int, seed) -> WeightedGraph:
    """Two independent ``G(n_half, m_half)`` blocks joined by one unit link.

    The bridge joins node ``n_half - 1`` to node ``n_half``. Blocks draw from
    child streams of ``seed`` so each is reproducible on its own.
    """
    ss = np.random.SeedSequence(seed)
    s0, s1 = ss.spawn(2)
    a = gnm_random(n_half, m_half, s0)
    b = gnm_random(n_half, m_half, s1)
    src = np.concatenate([a.src, b.src + n_half, [n_half - 1]])
    dst = np.concatenate([a.dst, b.dst + n_half, [n_half]])
    w = np.concatenate([a.weight, b.weight, [1.0]])
    return WeightedGraph._from_arrays(2 * n_half, src, dst, w)


def exp_decay(n: int, c: float, gamma: float) -> WeightedGraph:
    """Complete graph with ``w({i, j}) = c * exp(-gamma * |i - j|)``."""
    _check_n(n)
    if not c > 0:
        raise GraphError("c must be positive")
    if gamma < 0:
        raise GraphError("gamma must be non-negative")
    i, j = np.triu_indices(n, 1)
    return WeightedGraph._from_arrays(n, i, j, c * np.exp(-gamma * (j - i)))


def proximity(n: int, side: float, radius: float, seed, *, positions=False):
    """Unit-weight disk graph of ``n`` points uniform in a ``side x side`` square.

    Points within Euclidean distance ``radius`` (closed ball) are linked.
    Raises :class:`DisconnectedSampleError` when the sample is disconnected;
    the caller may resample with another seed.
    """
    _check_n(n)
    if not (side > 0 and radius > 0):
        raise GraphError("side and radius must be positive")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, side, size=(n, 2))
    i, j = np.triu_indices(n, 1)
    dist = np.hypot(*(pts[i] - pts[j]).T)
    keep = dist <= radius
    g = WeightedGraph._from_arrays(n, i[keep], j[keep], np.ones(int(keep.sum())))
    if not is_connected(g):
        raise DisconnectedSampleError(f"proximity sample (seed={seed}) is disconnected", g)
    return (g, pts) if positions else g


def ring_lattice(n: int, k: int = 1, w: float = 1.0) -> WeightedGraph:
    """Cycle where each node links to its ``k`` nearest neighbors on each side."""
    if n < 3 or not 1 <= k < n / 2:
        raise GraphError(f"invalid ring lattice n={n}, k={k}")
    edges = {}
    for a in range(n):
        for s in range(1, k + 1):
            b = (a + s) % n
            edges[(min(a, b), max(a, b))] = w
    return WeightedGraph.from_edges(n, ((a, b, x) for (a, b), x in edges.items()))


def gnp_random(n: int, p: float, seed, *, weights=(1.0, 1.0)) -> WeightedGraph:
    """Erdos-Renyi ``G(n, p)`` with weights uniform on ``weights``."""
    _check_n(n)
    rng = np.random.default_rng(seed)
    i, j = np.triu_indices(n, 1)
    keep = rng.random(i.size) < p
    lo, hi = weights
    w = rng.uniform(lo, hi, size=int(keep.sum())) if hi > lo else np.full(int(keep.sum()), float(lo))
    return WeightedGraph._from_arrays(n, i[keep], j[keep], w)


def random_connected(n: int, seed, *, p: float | None = None, weights=(0.5, 2.0)) -> WeightedGraph:
    """Random spanning tree plus ``G(n, p)`` extras, random weights.

    Used for property sweeps; always connected.
    """
    _check_n(n)
    rng = np.random.default_rng(seed)
    if p is None:
        p = min(1.0, 2.5 * math.log(n) / n)
    order = rng.permutation(n)
    edges: dict[tuple[int, int], float] = {}
    lo, hi = weights
    for k in range(1, n):
        a, b = int(order[k]), int(order[rng.integers(k)])
        edges[(min(a, b), max(a, b))] = float(rng.uniform(lo, hi))
    i, j = np.triu_indices(n, 1)
    extra = rng.random(i.size) < p
    for a, b in zip(i[extra].tolist(), j[extra].tolist()):
        if (a, b) not in edges:
            edges[(a, b)] = float(rng.uniform(lo, hi))
    return WeightedGraph.from_edges(n, ((a, b, w) for (a, b), w in edges.items()))
