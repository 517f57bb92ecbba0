"""Weighted undirected coupling graphs and their matrix views.

Nodes are dense integer labels ``0..n-1``. Edges are stored once per
unordered pair in canonical ``(i, j)`` order with ``i < j``; that order is
also the order used for sampling and for file output.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np


class GraphError(ValueError):
    """Invalid graph data."""


class AsymmetricGainError(GraphError):
    pass


class NegativeGainError(GraphError):
    pass


class SelfLoopError(GraphError):
    pass


class DuplicateEdgeError(GraphError):
    pass


class DisconnectedGraphError(GraphError):
    """An operation needs a connected coupling graph."""


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Immutable weighted undirected simple graph.

    ``src``, ``dst`` and ``weight`` are parallel read-only arrays with
    ``src < dst`` and edges sorted lexicographically.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    _key: bytes = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("src", "dst", "weight"):
            arr = getattr(self, name)
            arr.setflags(write=False)
        key = (
            np.int64(self.n).tobytes()
            + self.src.tobytes()
            + self.dst.tobytes()
            + self.weight.tobytes()
        )
        object.__setattr__(self, "_key", key)

    @classmethod
    def from_edges(
        cls, n: int, edges: Iterable[tuple[int, int, float]]
    ) -> "WeightedGraph":
        """Build a graph, validating simpleness, uniqueness and positivity."""
        n = int(n)
        if n < 1:
            raise GraphError(f"node count must be positive, got {n}")
        seen: dict[tuple[int, int], float] = {}
        for i, j, w in edges:
            i, j, w = int(i), int(j), float(w)
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise SelfLoopError(f"self-loop at node {i}")
            if not w > 0 or not np.isfinite(w):
                raise NegativeGainError(f"edge ({i}, {j}) has non-positive weight {w}")
            key = (i, j) if i < j else (j, i)
            if key in seen:
                raise DuplicateEdgeError(f"duplicate edge {key}")
            seen[key] = w
        keys = sorted(seen)
        src = np.fromiter((k[0] for k in keys), dtype=np.int64, count=len(keys))
        dst = np.fromiter((k[1] for k in keys), dtype=np.int64, count=len(keys))
        weight = np.fromiter((seen[k] for k in keys), dtype=np.float64, count=len(keys))
        return cls(n, src, dst, weight)

    @classmethod
    def _from_arrays(cls, n, src, dst, weight) -> "WeightedGraph":
        # trusted fast path: arrays already canonical and validated
        order = np.lexsort((dst, src))
        return cls(
            int(n),
            np.ascontiguousarray(src[order], dtype=np.int64),
            np.ascontiguousarray(dst[order], dtype=np.int64),
            np.ascontiguousarray(weight[order], dtype=np.float64),
        )

    @property
    def m(self) -> int:
        return int(self.src.size)

    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.src.tolist(), self.dst.tolist(), self.weight.tolist()))

    def edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def total_weight(self) -> float:
        return float(self.weight.sum())

    def scaled(self, kappa: float) -> "WeightedGraph":
        if not kappa > 0:
            raise GraphError("scale factor must be positive")
        return WeightedGraph(self.n, self.src.copy(), self.dst.copy(), self.weight * kappa)

    def with_edge(self, i: int, j: int, w: float) -> "WeightedGraph":
        """Return a copy with weight ``w`` added on ``{i, j}`` (edge created if absent)."""
        edges = {(a, b): c for a, b, c in self.edges()}
        key = (min(i, j), max(i, j))
        edges[key] = edges.get(key, 0.0) + w
        return WeightedGraph.from_edges(self.n, ((a, b, c) for (a, b), c in edges.items()))

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={self.m}, total_weight={self.total_weight():.6g})"


def from_gain_matrix(K) -> WeightedGraph:
    """Coupling graph of a feedback gain matrix.

    ``K`` must be symmetric, non-negative and zero on the diagonal; zero
    entries are absent links.
    """
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise GraphError(f"gain matrix must be square, got shape {K.shape}")
    if np.any(K < 0):
        raise NegativeGainError("gain matrix has negative entries")
    if np.any(np.diag(K) != 0):
        raise SelfLoopError("gain matrix has nonzero diagonal")
    if not np.array_equal(K, K.T):
        raise AsymmetricGainError("gain matrix is not symmetric")
    i, j = np.nonzero(np.triu(K, 1))
    return WeightedGraph._from_arrays(K.shape[0], i, j, K[i, j])


def gain_matrix(g: WeightedGraph) -> np.ndarray:
    """Weighted adjacency matrix ``A`` (equal to the gain matrix ``K``)."""
    A = np.zeros((g.n, g.n))
    A[g.src, g.dst] = g.weight
    A[g.dst, g.src] = g.weight
    return A


adjacency = gain_matrix


def degrees(g: WeightedGraph) -> np.ndarray:
    """Weighted degrees."""
    d = np.zeros(g.n)
    np.add.at(d, g.src, g.weight)
    np.add.at(d, g.dst, g.weight)
    return d


def incidence(g: WeightedGraph) -> np.ndarray:
    """``n x m`` incidence matrix, column ``e`` is ``b_e = e_i - e_j``."""
    B = np.zeros((g.n, g.m))
    cols = np.arange(g.m)
    B[g.src, cols] = 1.0
    B[g.dst, cols] = -1.0
    return B


def laplacian(g: WeightedGraph) -> np.ndarray:
    A = gain_matrix(g)
    return np.diag(A.sum(axis=1)) - A


def is_connected(g: WeightedGraph) -> bool:
    return n_components(g) == 1


def components(g: WeightedGraph) -> np.ndarray:
    """Component label per node (labels are 0-based, in order of first node)."""
    nbrs: list[list[int]] = [[] for _ in range(g.n)]
    for i, j in zip(g.src.tolist(), g.dst.tolist()):
        nbrs[i].append(j)
        nbrs[j].append(i)
    label = np.full(g.n, -1, dtype=np.int64)
    c = 0
    for start in range(g.n):
        if label[start] >= 0:
            continue
        label[start] = c
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in nbrs[u]:
                if label[v] < 0:
                    label[v] = c
                    queue.append(v)
        c += 1
    return label


def n_components(g: WeightedGraph) -> int:
    return int(components(g).max()) + 1 if g.n else 0


def sparsity_l0(g: WeightedGraph) -> int:
    """Number of nonzero adjacency entries, i.e. ``2 |E|``."""
    return 2 * g.m


def sparsity_s01(g: WeightedGraph) -> int:
    """Largest unweighted neighbor count over all nodes."""
    counts = np.bincount(np.concatenate([g.src, g.dst]), minlength=g.n)
    return int(counts.max()) if g.n else 0


def union(a: WeightedGraph, b: WeightedGraph) -> WeightedGraph:
    """Laplacian sum ``L_a + L_b`` as a graph (weights add on shared pairs)."""
    if a.n != b.n:
        raise GraphError("graphs must share a node set")
    acc: dict[tuple[int, int], float] = {}
    for i, j, w in a.edges() + b.edges():
        acc[(i, j)] = acc.get((i, j), 0.0) + w
    return WeightedGraph.from_edges(a.n, ((i, j, w) for (i, j), w in acc.items()))


# -- edge-list files ---------------------------------------------------------


def read_edgelist(path) -> tuple[WeightedGraph, list[str] | None]:
    """Parse a tab separated ``i j w`` file.

    Lines starting with ``#`` are comments. An optional ``n <count>`` header
    fixes the node count; otherwise it is ``max label + 1``. Labels that are
    not all non-negative integers are treated as string IDs and mapped to
    ``0..n-1`` in order of first appearance; the mapping is returned as the
    second element (``None`` for integer labels).
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_edgelist(text)


def parse_edgelist(text: str) -> tuple[WeightedGraph, list[str] | None]:
    n_header = None
    rows: list[tuple[str, str, float]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "n" and len(parts) == 2:
            if n_header is not None or rows:
                raise GraphError(f"line {lineno}: header must come before edges")
            n_header = int(parts[1])
            continue
        if len(parts) != 3:
            raise GraphError(f"line {lineno}: expected 'i<TAB>j<TAB>w', got {raw!r}")
        try:
            w = float(parts[2])
        except ValueError:
            raise GraphError(f"line {lineno}: bad weight {parts[2]!r}") from None
        rows.append((parts[0], parts[1], w))

    labels = [x for r in rows for x in r[:2]]
    if all(x.isdigit() for x in labels):
        names = None
        edges = [(int(i), int(j), w) for i, j, w in rows]
        n = max((max(i, j) for i, j, _ in edges), default=-1) + 1
    else:
        names = []
        index: dict[str, int] = {}
        for x in labels:
            if x not in index:
                index[x] = len(names)
                names.append(x)
        edges = [(index[i], index[j], w) for i, j, w in rows]
        n = len(names)
    if n_header is not None:
        if n_header < n:
            raise GraphError(f"header n={n_header} smaller than labels imply ({n})")
        n = n_header
    return WeightedGraph.from_edges(n, edges), names


def format_edgelist(g: WeightedGraph, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"n {g.n}")
    for i, j, w in g.edges():
        lines.append(f"{i}\t{j}\t{w:.17g}")
    return "\n".join(lines) + "\n"


def write_edgelist(g: WeightedGraph, path, comment: str | None = None) -> None:
    Path(path).write_text(format_edgelist(g, comment), encoding="utf-8")
