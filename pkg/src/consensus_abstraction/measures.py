"""Homogeneous systemic performance measures of first- and second-order
consensus networks.

Every public measure accepts a :class:`~consensus_abstraction.graph.WeightedGraph`,
a Laplacian matrix, a :class:`~consensus_abstraction.spectral.LaplacianSpectrum`
or a :class:`NetworkView` (which caches both matrix and spectrum).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .graph import WeightedGraph, laplacian
from .spectral import LaplacianSpectrum, decompose, spectrum


class MeasureError(ValueError):
    pass


class NetworkView:
    """A Laplacian with its spectrum computed at most once."""

    __slots__ = ("matrix", "_spec")

    def __init__(self, L):
        if isinstance(L, NetworkView):
            self.matrix, self._spec = L.matrix, L._spec
        elif isinstance(L, WeightedGraph):
            self.matrix = laplacian(L)
            self._spec = spectrum(L)
        elif isinstance(L, LaplacianSpectrum):
            self.matrix = L.matrix()
            self._spec = L
        else:
            self.matrix = np.asarray(L, dtype=np.float64)
            self._spec = None

    @property
    def spec(self) -> LaplacianSpectrum:
        if self._spec is None:
            self._spec = decompose(self.matrix)
        return self._spec

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def connected(self) -> bool:
        return self.spec.connected

    def positive_eigenvalues(self) -> np.ndarray:
        return self.spec.nonzero()

    def degrees(self) -> np.ndarray:
        self.spec.require_connected()
        return np.diag(self.matrix).copy()


def view(L) -> NetworkView:
    return L if isinstance(L, NetworkView) else NetworkView(L)


# -- spectral measures -------------------------------------------------------


def zeta(L, q: float = 1.0) -> float:
    """Spectral zeta measure ``(sum_{i>=2} lambda_i^-q)^(1/q)``, ``q >= 1``."""
    if q < 1:
        raise MeasureError(f"zeta order must be >= 1, got {q}")
    lam = view(L).positive_eigenvalues()
    return float(np.sum(lam ** (-q)) ** (1.0 / q))


def partial_zeta(L, k: int) -> float:
    """Sum of the ``k`` largest eigenvalues of ``L^+`` (the ``k`` slowest modes)."""
    lam = view(L).positive_eigenvalues()
    if not 1 <= k <= lam.size:
        raise MeasureError(f"k must be in [1, {lam.size}], got {k}")
    return float(np.sum(1.0 / lam[:k]))


def h2_norm(L) -> float:
    return math.sqrt(0.5 * float(np.sum(1.0 / view(L).positive_eigenvalues())))


def hinf_norm(L) -> float:
    return 1.0 / float(view(L).positive_eigenvalues()[0])


def hankel_norm(L) -> float:
    return 0.5 / float(view(L).positive_eigenvalues()[0])


def gamma_entropy(L, gamma: float) -> float:
    """Gamma entropy; ``inf`` when ``gamma`` is below the H-infinity norm.

    Each mode contributes ``gamma^2 (lam - sqrt(lam^2 - gamma^-2))``, evaluated
    in the cancellation-free form ``1 / (lam + sqrt(lam^2 - gamma^-2))``.
    """
    if not gamma > 0:
        raise MeasureError("gamma must be positive")
    lam = view(L).positive_eigenvalues()
    if gamma * lam[0] < 1.0:
        return math.inf
    root = np.sqrt(np.maximum(lam * lam - gamma ** -2, 0.0))
    return float(np.sum(1.0 / (lam + root)))


def hp_constant(p: float) -> float:
    """``(-B(p/2, -1/2))^(-1/p)``, computed through log-Gamma."""
    if p < 2 or not math.isfinite(p):
        raise MeasureError(f"p must be in [2, inf), got {p}")
    # -B(p/2, -1/2) = 2 sqrt(pi) Gamma(p/2) / Gamma((p-1)/2)
    log_neg_beta = math.log(2.0) + 0.5 * math.log(math.pi) + gammaln(p / 2) - gammaln((p - 1) / 2)
    return math.exp(-log_neg_beta / p)


def hp_norm(L, p: float) -> float:
    """H_p system norm ``alpha_0 * zeta_{p-1}(L)^(1 - 1/p)``."""
    c = hp_constant(p)
    return c * zeta(L, p - 1) ** (1.0 - 1.0 / p)


def uncertainty_volume(L) -> float:
    """``det(Y_inf + J/n) = prod_{i>=2} (2 lambda_i)^-1``."""
    lam = view(L).positive_eigenvalues()
    return float(np.exp(-np.sum(np.log(2.0 * lam))))


def second_order_h2(L, beta: float = 1.0) -> float:
    """H2 norm of the velocity output of the second-order formation model."""
    if not beta > 0:
        raise MeasureError("beta must be positive")
    lam = view(L).positive_eigenvalues()
    return math.sqrt(float(np.sum(lam ** -2.0)) / (2.0 * beta))


# -- degree-based measures ---------------------------------------------------


def local_deviation(L) -> float:
    """Steady-state expected total local deviation, ``1/2 sum_i 1/d_i``."""
    d = view(L).degrees()
    return 0.5 * float(np.sum(1.0 / d))


def velocity_local_deviation(L, beta: float = 1.0) -> float:
    """Second-order counterpart, ``(2 beta)^-1 sum_i d_i^-2``."""
    if not beta > 0:
        raise MeasureError("beta must be positive")
    d = view(L).degrees()
    return float(np.sum(d ** -2.0)) / (2.0 * beta)


def total_weight(L) -> float:
    """``w_total(L) = tr(L) / 2``."""
    return 0.5 * float(np.trace(view(L).matrix))


def inverse_total_weight(L) -> float:
    v = view(L)
    v.spec.require_connected()
    return 1.0 / total_weight(v)


# -- descriptors -------------------------------------------------------------


@dataclass(frozen=True)
class MeasureDescriptor:
    """A named homogeneous measure ``rho`` with order ``-alpha``.

    ``alpha`` is a constant except for measures whose order grows with the
    dimension (``per_dimension=True``, order ``alpha * (n - 1)``).
    ``scale_params`` maps the parameters to those valid for ``kappa * L``;
    only measures with a dimensional parameter (gamma entropy) need it.
    """

    name: str
    alpha: float
    evaluator: Callable[..., float] = field(repr=False, compare=False)
    params: tuple = ()
    per_dimension: bool = False
    scale_params: Callable[[tuple, float], tuple] | None = field(default=None, repr=False, compare=False)
    label: str = ""

    def order(self, n: int) -> float:
        return self.alpha * (n - 1) if self.per_dimension else self.alpha

    def __call__(self, L) -> float:
        return self.evaluator(view(L), *self.params)

    def rescaled(self, kappa: float) -> "MeasureDescriptor":
        """Descriptor whose value on ``kappa * L`` relates to ours on ``L``."""
        if self.scale_params is None:
            return self
        params = self.scale_params(self.params, kappa)
        return _make(self.name.split(":")[0], params)


def normalized_index(desc: MeasureDescriptor, L) -> float:
    """``rho(L) ** (1 / alpha)``; homogeneous of order -1. Infinite values pass through."""
    v = view(L)
    return desc(v) ** (1.0 / desc.order(v.n))


def relative_loss(desc: MeasureDescriptor, L, Ls) -> float:
    """``|Pi(L) - Pi(Ls)| / Pi(Ls)``.

    A disconnected ``Ls`` (or one where the measure is infinite) has
    ``Pi(Ls) = inf`` and the loss is reported as its limit, 1.
    """
    vs = view(Ls)
    if not vs.connected:
        return 1.0
    a = normalized_index(desc, L)
    b = normalized_index(desc, vs)
    if math.isinf(b):
        return 1.0 if math.isfinite(a) else math.nan
    return abs(a - b) / b


_FACTORIES: dict[str, Callable[..., MeasureDescriptor]] = {}


def _factory(key):
    def deco(fn):
        _FACTORIES[key] = fn
        return fn

    return deco


def _fmt(x) -> str:
    return format(x, ".17g") if isinstance(x, float) else str(x)


@_factory("zeta")
def _zeta(q=1.0):
    return MeasureDescriptor(f"zeta:{_fmt(float(q))}", 1.0, zeta, (float(q),), label=f"spectral zeta, q={q:g}")


@_factory("partialzeta")
def _partial(k=1):
    return MeasureDescriptor(f"partialzeta:{int(k)}", 1.0, partial_zeta, (int(k),), label=f"sum of {int(k)} slowest modes")


@_factory("h2")
def _h2():
    return MeasureDescriptor("h2", 0.5, h2_norm, label="H2 norm")


@_factory("hinf")
def _hinf():
    return MeasureDescriptor("hinf", 1.0, hinf_norm, label="H-infinity norm")


@_factory("hankel")
def _hankel():
    return MeasureDescriptor("hankel", 1.0, hankel_norm, label="Hankel norm")


@_factory("gamma")
def _gamma(gamma):
    return MeasureDescriptor(
        f"gamma:{_fmt(float(gamma))}",
        1.0,
        gamma_entropy,
        (float(gamma),),
        scale_params=lambda p, k: (p[0] / k,),
        label=f"gamma entropy, gamma={gamma:.6g}",
    )


@_factory("hp")
def _hp(p=2.0):
    p = float(p)
    return MeasureDescriptor(f"hp:{_fmt(p)}", 1.0 - 1.0 / p, hp_norm, (p,), label=f"H_{p:g} norm")


@_factory("locdev1")
def _locdev1():
    return MeasureDescriptor("locdev1", 1.0, local_deviation, label="local deviation (first order)")


@_factory("locdev2")
def _locdev2(beta=1.0):
    return MeasureDescriptor(
        f"locdev2:{_fmt(float(beta))}", 2.0, velocity_local_deviation, (float(beta),),
        label=f"local deviation (second order), beta={beta:g}",
    )


def _theta2_sq(L, beta):
    return second_order_h2(L, beta) ** 2


@_factory("theta2")
def _theta2(beta=1.0):
    return MeasureDescriptor(
        f"theta2:{_fmt(float(beta))}", 2.0, _theta2_sq, (float(beta),),
        label=f"squared second-order H2 norm, beta={beta:g}",
    )


@_factory("uvol")
def _uvol():
    return MeasureDescriptor("uvol", 1.0, uncertainty_volume, per_dimension=True, label="uncertainty volume")


@_factory("xi")
def _xi():
    return MeasureDescriptor("xi", 1.0, inverse_total_weight, label="inverse total weight")


def _make(key, params) -> MeasureDescriptor:
    return _FACTORIES[key](*params)


MEASURE_NAMES = tuple(_FACTORIES)


def parse_measure(text: str, reference=None) -> MeasureDescriptor:
    """Parse a CLI measure name such as ``zeta:2``, ``gamma:0.5`` or ``h2``.

    ``gamma`` without a value and ``partialzeta`` without ``k`` need a
    ``reference`` network (gamma defaults to ``2 / lambda_2``, ``k`` to
    ``ceil(n / 10)``).
    """
    key, _, arg = text.strip().partition(":")
    if key not in _FACTORIES:
        raise MeasureError(f"unknown measure {text!r}; known: {', '.join(MEASURE_NAMES)}")
    if key in ("h2", "hinf", "hankel", "locdev1", "uvol", "xi"):
        if arg:
            raise MeasureError(f"measure {key!r} takes no parameter")
        return _make(key, ())
    if not arg:
        if key == "gamma":
            if reference is None:
                raise MeasureError("gamma needs a value or a reference network")
            return _make(key, (2.0 / float(view(reference).positive_eigenvalues()[0]),))
        if key == "partialzeta":
            if reference is None:
                raise MeasureError("partialzeta needs k or a reference network")
            return _make(key, (math.ceil(view(reference).n / 10),))
        return _make(key, ())
    try:
        value = int(arg) if key == "partialzeta" else float(arg)
    except ValueError:
        raise MeasureError(f"bad parameter in {text!r}") from None
    return _make(key, (value,))


def catalog(reference) -> list[MeasureDescriptor]:
    """Full measure set with default parameters for ``reference``.

    q = 1, 2; gamma = 2 / lambda_2(reference); p = 2, 4; beta = 1;
    k = ceil(n / 10).
    """
    v = view(reference)
    lam2 = float(v.positive_eigenvalues()[0])
    return [
        _zeta(1.0),
        _zeta(2.0),
        _h2(),
        _hinf(),
        _hankel(),
        _gamma(2.0 / lam2),
        _hp(2.0),
        _hp(4.0),
        _locdev1(),
        _locdev2(1.0),
        _theta2(1.0),
        _uvol(),
        _xi(),
        _partial(max(1, math.ceil(v.n / 10))),
    ]


TABLE_MEASURES = ("hankel", "h2", "zeta:2", "locdev1")


def loss_table(descs, L, Ls) -> list[dict]:
    """Per-measure values and relative losses for an original/abstraction pair."""
    v, vs = view(L), view(Ls)
    rows = []
    for desc in descs:
        rows.append(
            {
                "name": desc.name,
                "order_alpha": desc.order(v.n),
                "value_original": desc(v),
                "value_abstract": desc(vs) if vs.connected else math.inf,
                "relative_loss": relative_loss(desc, v, vs),
            }
        )
    return rows
