"""Randomized network abstraction by effective-resistance sampling.

A single run draws ``M`` links independently with probability
``pi(e) = w(e) r(e) / (n - 1)`` and gives each drawn link the weight
``count(e) * w(e) / (M pi(e))``. The result is then certified exactly by
the Loewner sandwich constant ``eps*`` of the pair, which bounds the relative
loss of every homogeneous systemic performance measure at once.

Randomness: a run seeded with ``s`` uses ``numpy.random.default_rng(s)``.
Attempt ``k`` of a retried run with master seed ``s`` uses
``SeedSequence([s, k])``; part ``i`` of a partitioned run uses
``SeedSequence([s, i, k])``. Results do not depend on thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graph import DisconnectedGraphError, GraphError, WeightedGraph, laplacian, sparsity_l0, sparsity_s01, union
from .generators import complete
from .measures import catalog, loss_table, normalized_index
from .spectral import (
    effective_resistances,
    loewner_epsilon,
    loewner_epsilon_on_range,
    pseudoinverse,
    spectrum,
)

#: constant in ``d = C eps^-2 ln n``
DEFAULT_C = 18.0
DEFAULT_RETRIES = 20


class AbstractionError(ValueError):
    pass


class UncertifiedAbstraction(AbstractionError):
    pass


@dataclass(frozen=True, eq=False)
class AbstractionResult:
    """One abstraction and its certificate.

    ``epsilon_certified`` is ``nan`` when certification was skipped and at
    least 1 when ``graph_s`` is disconnected.
    """

    graph_s: WeightedGraph
    m_samples: int
    distinct_links: int
    epsilon_certified: float
    d_effective: float
    seed: object
    loss_table: tuple = ()
    d_requested: float | None = None
    epsilon_requested: float | None = None
    retries: int = 0
    certified: bool | None = None
    attempt: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.graph_s.n


def child_seed(*key) -> np.random.SeedSequence:
    """Deterministic child stream for a tuple of non-negative integers."""
    return np.random.SeedSequence([int(k) for k in key])


# -- sampling ----------------------------------------------------------------


def sampling_distribution(g: WeightedGraph, r=None) -> np.ndarray:
    """``pi(e) = w(e) r(e) / (n - 1)`` in canonical edge order."""
    spectrum(g).require_connected()
    if r is None:
        r = effective_resistances(g)
    return g.weight * r.edge / (g.n - 1)


def _range_distribution(g: WeightedGraph) -> np.ndarray:
    # same law for a possibly disconnected graph; sum w r equals rank(L)
    if g.m == 0:
        raise AbstractionError("nothing to sample: graph has no links")
    r = effective_resistances(g, pseudoinverse(spectrum(g), on_range=True), on_range=True)
    wr = g.weight * r.edge
    return wr / wr.sum()


def expected_distinct_links(pi, m_samples: int) -> float:
    """``sum_e 1 - (1 - pi(e))^M``: expected number of distinct drawn links."""
    pi = np.asarray(pi, dtype=np.float64)
    return float(np.sum(-np.expm1(m_samples * np.log1p(-np.minimum(pi, 1.0 - 1e-16)))))


def samples_for_link_budget(pi, links: float) -> int:
    """Smallest ``M`` whose expected distinct link count reaches ``links``."""
    pi = np.asarray(pi, dtype=np.float64)
    if not 0 < links <= pi.size:
        raise AbstractionError(f"link budget must be in (0, {pi.size}], got {links}")
    if links > expected_distinct_links(pi, 1 << 40):
        raise AbstractionError("link budget unreachable")
    lo, hi = 1, 1
    while expected_distinct_links(pi, hi) < links:
        lo, hi = hi, hi * 2
    while lo < hi:
        mid = (lo + hi) // 2
        if expected_distinct_links(pi, mid) >= links:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _draw(g: WeightedGraph, pi: np.ndarray, m_samples: int, rng) -> WeightedGraph:
    u = rng.random(m_samples)
    counts = _kernels.sample_counts(np.cumsum(pi), u)
    keep = counts > 0
    unit = g.weight / (m_samples * pi)
    w = counts[keep] * unit[keep]
    return WeightedGraph._from_arrays(g.n, g.src[keep], g.dst[keep], w)


def _resolve_samples(n, pi, d, m_samples, budget):
    if m_samples is not None:
        if d is not None:
            raise AbstractionError("give either d or m_samples, not both")
        M = int(m_samples)
    else:
        if d is None or not d > 0 or not math.isfinite(d):
            raise AbstractionError(f"d must be a positive finite number, got {d}")
        if budget == "samples":
            M = math.ceil(d * n / 2)
        elif budget == "links":
            M = samples_for_link_budget(pi, min(d * n / 2, pi.size))
        else:
            raise AbstractionError(f"unknown budget mode {budget!r}")
    if M < 1:
        raise AbstractionError("need at least one sample")
    return M


def abstract(
    g: WeightedGraph,
    d: float | None = None,
    seed=0,
    *,
    m_samples: int | None = None,
    budget: str = "samples",
    certify: bool = True,
    measures=None,
    pi=None,
) -> AbstractionResult:
    """One run of the sampling algorithm.

    By default ``M = ceil(d n / 2)`` draws. With ``budget="links"`` ``M`` is
    chosen so the expected number of distinct links is ``d n / 2`` (at most
    ``dn/2`` links, the count that defines an ``(eps, d)``-abstraction).
    ``measures`` is a list of descriptors for the loss table (default: the
    full catalog; pass ``()`` to skip). No retry happens here: a
    disconnected outcome is returned with ``eps* >= 1``.
    """
    if pi is None:
        pi = sampling_distribution(g)
    M = _resolve_samples(g.n, pi, d, m_samples, budget)
    rng = np.random.default_rng(seed)
    gs = _draw(g, pi, M, rng)
    eps = loewner_epsilon(spectrum(g), laplacian(gs)) if certify else math.nan
    table = ()
    if certify:
        if measures is None:
            measures = catalog(g)
        table = tuple(loss_table(measures, g, gs)) if measures else ()
    return AbstractionResult(
        graph_s=gs,
        m_samples=M,
        distinct_links=gs.m,
        epsilon_certified=eps,
        d_effective=2.0 * gs.m / g.n,
        seed=seed,
        loss_table=table,
        d_requested=d,
    )


def default_d(n: int, epsilon: float, C: float = DEFAULT_C) -> float:
    """``d = C eps^-2 ln n``."""
    return C * math.log(n) / epsilon**2


def check_epsilon(n: int, epsilon: float):
    lo = 1.0 / math.sqrt(n)
    if not (lo < epsilon <= 1.0):
        raise AbstractionError(f"epsilon must lie in ({lo:.6g}, 1] for n={n}, got {epsilon}")


def _first_certified(run, epsilon, max_retries, threads):
    """Run attempts ``0..max_retries`` in batches; lowest certified index wins."""
    attempts = max_retries + 1
    results = {}
    threads = max(1, int(threads))
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        k = 0
        while k < attempts:
            batch = range(k, min(k + threads, attempts))
            outs = list(pool.map(run, batch)) if pool else [run(i) for i in batch]
            for i, res in zip(batch, outs):
                results[i] = res
            ok = [i for i in batch if results[i].epsilon_certified <= epsilon]
            if ok:
                return results[min(ok)], min(ok), True
            k = batch.stop
    finally:
        if pool:
            pool.shutdown()
    best = min(results, key=lambda i: (results[i].epsilon_certified, i))
    return results[best], best, False


def _rebuild(res: AbstractionResult, **changes) -> AbstractionResult:
    fields = {f: getattr(res, f) for f in res.__dataclass_fields__}
    fields.update(changes)
    return AbstractionResult(**fields)


def abstract_until(
    g: WeightedGraph,
    epsilon: float,
    seed=0,
    max_retries: int = DEFAULT_RETRIES,
    *,
    C: float = DEFAULT_C,
    d: float | None = None,
    budget: str = "samples",
    threads: int = 1,
    measures=None,
) -> AbstractionResult:
    """Repeat :func:`abstract` with child seeds until ``eps* <= epsilon``.

    ``d`` defaults to ``C eps^-2 ln n``. When every attempt fails, the
    attempt with the smallest ``eps*`` is returned with ``certified=False``.
    """
    check_epsilon(g.n, epsilon)
    if d is None:
        d = default_d(g.n, epsilon, C)
    pi = sampling_distribution(g)

    def run(k):
        return abstract(g, d, child_seed(seed, k), budget=budget, measures=(), pi=pi)

    res, k, ok = _first_certified(run, epsilon, max_retries, threads)
    if measures is None:
        measures = catalog(g)
    return _rebuild(
        res,
        seed=seed,
        attempt=k,
        retries=k if ok else max_retries,
        certified=ok,
        epsilon_requested=epsilon,
        loss_table=tuple(loss_table(measures, g, res.graph_s)) if measures else (),
    )


def superiorize(res, L=None) -> WeightedGraph:
    """Rescale a certified abstraction by ``1 / (1 - eps*)``.

    The result dominates ``L`` in the Loewner order, so every monotone
    measure weakly improves. ``res`` is an :class:`AbstractionResult` or a
    ``(graph_s, eps)`` pair. If ``L`` is given, ``eps*`` is recomputed
    against it.
    """
    if isinstance(res, AbstractionResult):
        gs, eps = res.graph_s, res.epsilon_certified
    else:
        gs, eps = res
    if L is not None:
        eps = loewner_epsilon(L, laplacian(gs))
    if not eps < 1:
        raise UncertifiedAbstraction(f"cannot superiorize with eps*={eps}")
    if eps == 0:
        return gs
    return gs.scaled(1.0 / (1.0 - eps))


# -- tradeoffs ---------------------------------------------------------------


@dataclass(frozen=True)
class TradeoffCheck:
    lhs_l0: float
    rhs_l0: float
    lhs_s01: float
    rhs_s01: float
    holds: bool


def tradeoff_check(desc, g: WeightedGraph, *, rtol: float = 1e-12) -> TradeoffCheck:
    """Sparsity/performance tradeoffs of a coupling graph.

    ``Pi(L) ||A||_l0 >= 2 rho* (n - 1)`` and ``Pi(L) ||A||_S01 >= 2 rho*``,
    where ``rho* = Pi(w* K_n)`` and ``w*`` is the largest link weight. For a
    homogeneous measure ``rho* = Pi(K_n) / w*``.
    """
    n = g.n
    if n < 3:
        raise GraphError("tradeoff check needs n > 2")
    spectrum(g).require_connected()
    wmax = float(g.weight.max())
    rho_star = normalized_index(desc, complete(n, wmax))
    pi_l = normalized_index(desc, g)
    lhs0, rhs0 = pi_l * sparsity_l0(g), 2.0 * rho_star * (n - 1)
    lhs1, rhs1 = pi_l * sparsity_s01(g), 2.0 * rho_star
    holds = lhs0 >= rhs0 * (1 - rtol) and lhs1 >= rhs1 * (1 - rtol)
    return TradeoffCheck(lhs0, rhs0, lhs1, rhs1, bool(holds))


# -- localized and parallel abstraction --------------------------------------


@dataclass(frozen=True, eq=False)
class PartitionedNetwork:
    """``L = L0 + sum_i L_i`` with link-disjoint parts on a shared node set."""

    base: WeightedGraph
    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        object.__setattr__(self, "parts", parts)
        if not parts:
            raise GraphError("need at least one part")
        n = self.base.n
        seen: dict[tuple[int, int], int] = {}
        for k, p in enumerate(parts):
            if p.n != n:
                raise GraphError(f"part {k} has {p.n} nodes, base has {n}")
            for e in p.edge_set():
                if e in seen:
                    raise GraphError(f"parts {seen[e]} and {k} overlap on link {e}")
                seen[e] = k

    @property
    def n(self) -> int:
        return self.base.n

    def total(self) -> WeightedGraph:
        g = self.base
        for p in self.parts:
            g = union(g, p)
        return g


@dataclass(frozen=True, eq=False)
class PartResult:
    """Sparsified part with its own-range certificate."""

    graph: WeightedGraph
    graph_s: WeightedGraph
    m_samples: int
    epsilon_local: float
    certified: bool
    attempt: int

    @property
    def distinct_links(self) -> int:
        return self.graph_s.m


@dataclass(frozen=True, eq=False)
class PartitionedResult:
    parts: tuple
    base: WeightedGraph
    graph: WeightedGraph
    graph_s: WeightedGraph
    epsilon_global: float
    epsilon_requested: float
    seed: object

    @property
    def epsilon_parts_max(self) -> float:
        return max((p.epsilon_local for p in self.parts), default=0.0)

    @property
    def certified(self) -> bool:
        return all(p.certified for p in self.parts)


def _support_size(g: WeightedGraph) -> int:
    return int(np.unique(np.concatenate([g.src, g.dst])).size)


def sparsify_part(
    part: WeightedGraph,
    epsilon: float,
    key: tuple,
    *,
    max_retries: int = DEFAULT_RETRIES,
    C: float = DEFAULT_C,
    d: float | None = None,
) -> PartResult:
    """Sample one (possibly disconnected) part on its own range.

    ``d`` defaults to ``C eps^-2 ln k`` with ``k`` the number of nodes the
    part touches; ``M = ceil(d k / 2)``. Attempt ``a`` uses
    ``SeedSequence(key + (a,))``. ``epsilon = 0`` returns the part unchanged.
    """
    if part.m == 0:
        raise AbstractionError("part has no links to sparsify")
    if epsilon == 0:
        return PartResult(part, part, 0, 0.0, True, 0)
    if not 0 < epsilon <= 1:
        raise AbstractionError(f"epsilon must be in (0, 1], got {epsilon}")
    k = max(_support_size(part), 2)
    if d is None:
        d = default_d(k, epsilon, C)
    M = max(1, math.ceil(d * k / 2))
    pi = _range_distribution(part)
    spec = spectrum(part)
    best = None
    for a in range(max_retries + 1):
        gs = _draw(part, pi, M, np.random.default_rng(child_seed(*key, a)))
        eps = loewner_epsilon_on_range(spec, laplacian(gs))
        if best is None or eps < best.epsilon_local:
            best = PartResult(part, gs, M, eps, eps <= epsilon, a)
        if eps <= epsilon:
            return PartResult(part, gs, M, eps, True, a)
    return best


def abstract_localized(
    L0: WeightedGraph,
    L1: WeightedGraph,
    epsilon: float,
    seed=0,
    *,
    max_retries: int = DEFAULT_RETRIES,
    C: float = DEFAULT_C,
    d: float | None = None,
) -> PartitionedResult:
    """Sparsify only ``L1`` while keeping the base ``L0`` fixed.

    The returned ``epsilon_global`` is the closed-loop constant of
    ``(L0 + L1, L0 + L1_hat)``; it never exceeds the part's own-range
    constant.
    """
    return abstract_parallel(
        PartitionedNetwork(L0, (L1,)), epsilon, seed, max_retries=max_retries, C=C, d=d
    )


def abstract_parallel(
    net: PartitionedNetwork,
    epsilon: float,
    seed=0,
    *,
    threads: int = 1,
    max_retries: int = DEFAULT_RETRIES,
    C: float = DEFAULT_C,
    d: float | None = None,
) -> PartitionedResult:
    """Sparsify every part independently (concurrently with ``threads > 1``).

    Part ``i`` draws from ``SeedSequence([seed, i, attempt])``.
    """
    total = net.total()
    spec = spectrum(total)
    if not spec.connected:
        raise DisconnectedGraphError("base plus parts is disconnected")

    def run(i):
        return sparsify_part(net.parts[i], epsilon, (seed, i), max_retries=max_retries, C=C, d=d)

    idx = range(len(net.parts))
    if threads > 1 and len(net.parts) > 1:
        with ThreadPoolExecutor(int(threads)) as pool:
            results = tuple(pool.map(run, idx))
    else:
        results = tuple(run(i) for i in idx)
    gs = net.base
    for r in results:
        gs = union(gs, r.graph_s)
    eps_g = loewner_epsilon(spec, laplacian(gs))
    return PartitionedResult(results, net.base, total, gs, eps_g, epsilon, seed)


# -- reports -----------------------------------------------------------------


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _seed_value(seed):
    if isinstance(seed, (int, np.integer)):
        return int(seed)
    if isinstance(seed, np.random.SeedSequence):
        return [int(e) for e in np.atleast_1d(seed.entropy)]
    return None if seed is None else str(seed)


def measure_rows(table) -> list[dict]:
    return [
        {
            "name": row["name"],
            "order_alpha": _num(row["order_alpha"]),
            "value_original": _num(row["value_original"]),
            "value_abstract": _num(row["value_abstract"]),
            "relative_loss": _num(row["relative_loss"]),
        }
        for row in table
    ]


def abstraction_report(g: WeightedGraph, res: AbstractionResult, *, h2_error=None, config=None) -> dict:
    """JSON-ready report; non-finite numbers become ``null``."""
    report = {
        "n": g.n,
        "m_original": g.m,
        "m_abstract": res.distinct_links,
        "m_samples": res.m_samples,
        "d_requested": _num(res.d_requested),
        "d_effective": _num(res.d_effective),
        "epsilon_requested": _num(res.epsilon_requested),
        "epsilon_certified": _num(res.epsilon_certified),
        "certified": res.certified
        if res.certified is not None
        else bool(res.epsilon_certified < 1),
        "seed": _seed_value(res.seed),
        "retries": res.retries,
        "measures": measure_rows(res.loss_table),
        "weight_total_original": g.total_weight(),
        "weight_total_abstract": res.graph_s.total_weight(),
    }
    if h2_error is not None:
        report["h2_error"] = h2_error
    if config is not None:
        report["config"] = config
    return report


def partition_report(res: PartitionedResult) -> dict:
    parts = []
    for i, p in enumerate(res.parts):
        parts.append(
            {
                "index": i,
                "m_original": p.graph.m,
                "m_abstract": p.distinct_links,
                "m_samples": p.m_samples,
                "epsilon_certified": _num(p.epsilon_local),
                "certified": p.certified,
                "attempt": p.attempt,
                "weight_total_original": p.graph.total_weight(),
                "weight_total_abstract": p.graph_s.total_weight(),
            }
        )
    return {
        "n": res.graph.n,
        "m_base": res.base.m,
        "m_original": res.graph.m,
        "m_abstract": res.graph_s.m,
        "epsilon_requested": _num(res.epsilon_requested),
        "epsilon_global": _num(res.epsilon_global),
        "epsilon_parts_max": _num(res.epsilon_parts_max),
        "certified": res.certified and res.epsilon_global <= res.epsilon_requested,
        "seed": _seed_value(res.seed),
        "parts": parts,
    }
