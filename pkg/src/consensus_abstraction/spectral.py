"""Dense spectral machinery for graph Laplacians.

Everything here is exact O(n^3) linear algebra on dense matrices.
"""
from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .graph import DisconnectedGraphError, WeightedGraph, laplacian

#: relative cutoff: lambda_2 > CONNECTIVITY_RTOL * lambda_n means connected
CONNECTIVITY_RTOL = 1e-8


class SpectralError(ArithmeticError):
    pass


def _normalize_signs(U: np.ndarray) -> np.ndarray:
    # first component with |u| > tol made positive, column by column
    tol = 1e-12
    big = np.abs(U) > tol
    first = np.argmax(big, axis=0)
    signs = np.sign(U[first, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


@dataclass(frozen=True, eq=False)
class LaplacianSpectrum:
    """Eigen-decomposition ``L = U diag(lambdas) U^T`` with ascending eigenvalues."""

    lambdas: np.ndarray
    vectors: np.ndarray

    @property
    def n(self) -> int:
        return self.lambdas.size

    @property
    def threshold(self) -> float:
        return CONNECTIVITY_RTOL * max(float(self.lambdas[-1]), 0.0)

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.lambdas > self.threshold)) if self.lambdas[-1] > 0 else 0

    @property
    def connected(self) -> bool:
        return self.n == 1 or self.rank == self.n - 1

    @property
    def algebraic_connectivity(self) -> float:
        return float(self.lambdas[1])

    def nonzero(self) -> np.ndarray:
        """The ``n - 1`` positive eigenvalues; raises if the graph is disconnected."""
        self.require_connected()
        return self.lambdas[1:]

    def require_connected(self):
        if not self.connected:
            raise DisconnectedGraphError(
                f"Laplacian is disconnected (lambda_2={self.lambdas[1]:.3g}, "
                f"lambda_n={self.lambdas[-1]:.3g})"
            )

    def matrix(self) -> np.ndarray:
        return (self.vectors * self.lambdas) @ self.vectors.T


def decompose(L) -> LaplacianSpectrum:
    L = np.asarray(L, dtype=np.float64)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise SpectralError("Laplacian must be square")
    scale = max(np.abs(L).max(), 1.0)
    if np.abs(L - L.T).max() > 1e-12 * scale:
        raise SpectralError("Laplacian must be symmetric")
    try:
        lam, U = np.linalg.eigh(0.5 * (L + L.T))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise SpectralError(f"eigensolver did not converge: {exc}") from exc
    order = np.argsort(lam, kind="stable")
    lam, U = lam[order], U[:, order]
    lam.setflags(write=False)
    U = _normalize_signs(U)
    U.setflags(write=False)
    return LaplacianSpectrum(lam, U)


class _SpectrumCache:
    """Small LRU memo of per-graph decompositions, safe across threads."""

    def __init__(self, maxsize=64):
        self._data: OrderedDict = OrderedDict()
        self._lock = threading.Lock()
        self.maxsize = maxsize

    def get(self, g: WeightedGraph) -> LaplacianSpectrum:
        with self._lock:
            hit = self._data.get(g)
            if hit is not None:
                self._data.move_to_end(g)
                return hit
        spec = decompose(laplacian(g))
        with self._lock:
            self._data[g] = spec
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)
        return spec

    def clear(self):
        with self._lock:
            self._data.clear()


_cache = _SpectrumCache()


def spectrum(g: WeightedGraph) -> LaplacianSpectrum:
    """Cached decomposition of ``laplacian(g)``."""
    return _cache.get(g)


def clear_cache():
    _cache.clear()


def as_spectrum(x) -> LaplacianSpectrum:
    """Accept a graph, a Laplacian matrix, or a spectrum."""
    if isinstance(x, LaplacianSpectrum):
        return x
    if isinstance(x, WeightedGraph):
        return spectrum(x)
    return decompose(x)


def pseudoinverse(spec, *, on_range=False) -> np.ndarray:
    """Moore-Penrose pseudoinverse ``L^+``.

    With ``on_range=True`` a disconnected Laplacian is allowed and only
    eigenvalues above the connectivity cutoff are inverted.
    """
    spec = as_spectrum(spec)
    if on_range:
        keep = spec.lambdas > spec.threshold
        if spec.lambdas[-1] <= 0:
            keep[:] = False
    else:
        spec.require_connected()
        keep = np.zeros(spec.n, dtype=bool)
        keep[1:] = True
    U = spec.vectors[:, keep]
    return (U / spec.lambdas[keep]) @ U.T


@dataclass(frozen=True, eq=False)
class ResistanceTable:
    """Pairwise effective resistances and the per-edge view ``r(e)``."""

    r: np.ndarray
    edge: np.ndarray

    def foster_sum(self, g: WeightedGraph) -> float:
        return float(np.dot(g.weight, self.edge))


def effective_resistances(g: WeightedGraph, Lpinv=None, *, on_range=False) -> ResistanceTable:
    """``r_ij = l+_ii + l+_jj - 2 l+_ij`` for all pairs.

    Entries between different components are meaningless when
    ``on_range=True``; only ``edge`` is used in that case.
    """
    if Lpinv is None:
        Lpinv = pseudoinverse(spectrum(g), on_range=on_range)
    elif not on_range:
        spectrum(g).require_connected()
    diag = np.diag(Lpinv)
    r = diag[:, None] + diag[None, :] - 2.0 * Lpinv
    r = 0.5 * (r + r.T)
    np.fill_diagonal(r, 0.0)
    np.maximum(r, 0.0, out=r)
    edge = r[g.src, g.dst].copy()
    return ResistanceTable(r, edge)


def _generalized_spread(spec: LaplacianSpectrum, Ls, keep) -> tuple[float, float]:
    Ur = spec.vectors[:, keep]
    s = 1.0 / np.sqrt(spec.lambdas[keep])
    B = (Ur.T @ np.asarray(Ls, dtype=np.float64) @ Ur) * s[:, None] * s[None, :]
    mu = np.linalg.eigvalsh(0.5 * (B + B.T))
    return float(mu[0]), float(mu[-1])


def loewner_epsilon(L, Ls) -> float:
    """Smallest ``eps`` with ``(1 - eps) L <= Ls <= (1 + eps) L``.

    ``L`` must be connected. ``Ls`` is read on the range of ``L`` (both are
    Laplacians, so they share the all-ones kernel). A disconnected ``Ls``
    gives a value of at least 1.
    """
    spec = as_spectrum(L)
    spec.require_connected()
    keep = np.zeros(spec.n, dtype=bool)
    keep[1:] = True
    lo, hi = _generalized_spread(spec, _as_matrix(Ls), keep)
    return max(1.0 - lo, hi - 1.0, 0.0)


def loewner_epsilon_on_range(L, Ls, *, kernel_rtol=1e-9) -> float:
    """Sandwich constant restricted to ``range(L)`` for a possibly disconnected ``L``.

    Returns ``inf`` when ``Ls`` does not vanish on the kernel of ``L`` (the
    sandwich cannot hold there).
    """
    spec = as_spectrum(L)
    Ls = _as_matrix(Ls)
    if spec.lambdas[-1] <= 0:
        return 0.0 if np.abs(Ls).max(initial=0.0) == 0 else float("inf")
    keep = spec.lambdas > spec.threshold
    K = spec.vectors[:, ~keep]
    scale = max(float(spec.lambdas[-1]), np.abs(Ls).max(initial=0.0))
    if K.size and np.abs(Ls @ K).max() > kernel_rtol * scale:
        return float("inf")
    lo, hi = _generalized_spread(spec, Ls, keep)
    return max(1.0 - lo, hi - 1.0, 0.0)


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, WeightedGraph):
        return laplacian(x)
    if isinstance(x, LaplacianSpectrum):
        return x.matrix()
    return np.asarray(x, dtype=np.float64)


def sylvester_solve(A, B, C, *, tol=1e-12) -> np.ndarray:
    """Solve ``A X + X B = C`` for symmetric positive definite ``A`` and ``B``.

    Works in the two eigenbases: ``X = U_A [(U_A^T C U_B)_ij / (a_i + b_j)] U_B^T``.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    a, Ua = np.linalg.eigh(0.5 * (A + A.T))
    b, Ub = np.linalg.eigh(0.5 * (B + B.T))
    denom = a[:, None] + b[None, :]
    scale = max(abs(a).max(), abs(b).max(), 1.0)
    if denom.min() <= tol * scale:
        raise SpectralError(
            f"Sylvester equation is (nearly) singular: min(a_i + b_j) = {denom.min():.3g}"
        )
    return Ua @ ((Ua.T @ C @ Ub) / denom) @ Ub.T
