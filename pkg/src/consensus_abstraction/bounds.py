"""H2 distance between a network and its abstraction, and its upper bounds."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .measures import h2_norm, view
from .spectral import pseudoinverse, sylvester_solve


class BoundError(ValueError):
    pass


def _connected(L):
    v = view(L)
    v.spec.require_connected()
    return v


def h2_error_exact(L, Ls) -> float:
    """``||G - G_s||_H2`` for first-order networks driven by the same noise.

    With ``M_n = I - J/n`` and ``P`` solving
    ``(L + J/n) P + P (Ls + J/n) = M_n``, the cross covariance of the two
    centered outputs is ``P`` and
    ``||G - G_s||^2 = tr(L^+)/2 + tr(Ls^+)/2 - 2 tr(P M_n)``.
    """
    v, vs = _connected(L), _connected(Ls)
    n = v.n
    J = np.full((n, n), 1.0 / n)
    Mn = np.eye(n) - J
    P = sylvester_solve(v.matrix + J, vs.matrix + J, Mn)
    sq = 0.5 * float(np.sum(1.0 / v.positive_eigenvalues())) + 0.5 * float(
        np.sum(1.0 / vs.positive_eigenvalues())
    ) - 2.0 * float(np.trace(P @ Mn))
    # rounding can push an exact zero slightly negative
    scale = float(np.sum(1.0 / v.positive_eigenvalues()))
    if sq < 0 and sq > -1e-10 * scale:
        sq = 0.0
    return math.sqrt(sq)


def h2_error_trace_bound(L, Ls) -> float:
    """``sqrt(tr(Ls^+ + L^+ - 4 (L + Ls)^+) / 2)``.

    The radicand is the convexity gap of ``tr(L^+)`` and is never negative.
    """
    v, vs = _connected(L), _connected(Ls)
    tr = float(np.sum(1.0 / v.positive_eigenvalues()))
    trs = float(np.sum(1.0 / vs.positive_eigenvalues()))
    trsum = float(np.trace(pseudoinverse(view(v.matrix + vs.matrix).spec)))
    gap = 0.5 * (tr + trs - 4.0 * trsum)
    if gap < 0 and gap > -1e-10 * (tr + trs):
        gap = 0.0
    return math.sqrt(gap)


def relative_h2_error_bound(epsilon: float) -> float:
    """Relative bound ``sqrt(eps (4 - eps) / ((1 - eps)(2 + eps)))`` for ``eps < 1``."""
    if not 0 <= epsilon < 1:
        raise BoundError(f"epsilon must be in [0, 1), got {epsilon}")
    return math.sqrt(epsilon * (4 - epsilon) / ((1 - epsilon) * (2 + epsilon)))


def output_error_bound(L, epsilon: float) -> float:
    """Bound on the steady-state ``E||y - y_s||^2`` for an ``eps``-approximation."""
    if not 0 <= epsilon < 1:
        raise BoundError(f"epsilon must be in [0, 1), got {epsilon}")
    v = _connected(L)
    tr = float(np.sum(1.0 / v.positive_eigenvalues()))
    return epsilon * (4 - epsilon) / (2 * (1 - epsilon) * (2 + epsilon)) * tr


@dataclass(frozen=True)
class H2ErrorReport:
    """Exact H2 distance with both bounds.

    ``relative_bound`` is dimensionless; ``absolute_bound`` is it times
    ``h2_original``. Both are ``None`` when ``epsilon_used >= 1``.
    """

    exact: float
    trace_bound: float
    relative_bound: float | None
    absolute_bound: float | None
    epsilon_used: float
    h2_original: float

    @property
    def relative_error(self) -> float:
        return self.exact / self.h2_original

    def chain_holds(self, atol: float = 1e-8) -> bool:
        ok = self.exact <= self.trace_bound + atol
        if self.absolute_bound is not None:
            ok = ok and self.trace_bound <= self.absolute_bound + atol
        return ok

    def to_dict(self) -> dict:
        out = asdict(self)
        out["relative_error"] = self.relative_error
        return out


def h2_error_report(L, Ls, epsilon: float) -> H2ErrorReport:
    exact = h2_error_exact(L, Ls)
    trace = h2_error_trace_bound(L, Ls)
    h2 = h2_norm(L)
    if epsilon < 1:
        rel = relative_h2_error_bound(epsilon)
        absolute = rel * h2
    else:
        rel = absolute = None
    return H2ErrorReport(exact, trace, rel, absolute, float(epsilon), h2)
