"""Acceptance criteria 1 to 12, one verdict line per criterion.

Each test records ``criterion N: PASS|FAIL`` with a short detail string;
the lines are printed at the end of the pytest run by ``conftest.py``.
Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import math
import sys
import time

import numpy as np
import pytest
from scipy.stats import binomtest

from consensus_abstraction import generators as gen
from consensus_abstraction.abstraction import (
    PartitionedNetwork,
    abstract,
    abstract_localized,
    abstract_parallel,
    abstract_until,
    sampling_distribution,
    tradeoff_check,
)
from consensus_abstraction.bounds import (
    h2_error_exact,
    h2_error_trace_bound,
    output_error_bound,
    relative_h2_error_bound,
)
from consensus_abstraction.cli import main as cli_main
from consensus_abstraction.graph import WeightedGraph, laplacian, write_edgelist
from consensus_abstraction.measures import (
    TABLE_MEASURES,
    catalog,
    h2_norm,
    hp_norm,
    local_deviation,
    parse_measure,
    relative_loss,
    uncertainty_volume,
)
from consensus_abstraction.simulate import simulate_first_order, simulate_pair_error, simulate_second_order
from consensus_abstraction.sparsity_demo import RegularizationInstance, demo_report
from consensus_abstraction.spectral import effective_resistances, loewner_epsilon

from conftest import random_graphs
from oracles import lyapunov_uncertainty_volume, quad_hp_norm

RESULTS = []


def sort_key(line):
    head = line.split(":")[0].split()[1]
    return (int("".join(c for c in head if c.isdigit())), line)


def verdict(num, ok, detail=""):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    RESULTS.append(line)
    print(line)
    return ok


def within(est, se, exact):
    return abs(est - exact) <= 0.05 * exact + 3 * se


def certified_pairs(count, seed, n_range=(20, 40), d=8.0):
    """Original/abstraction pairs with a certified Loewner constant below 1."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        g = gen.gnm_random(n, min(n * (n - 1) // 2, 6 * n), int(rng.integers(2**31)))
        res = abstract(g, d, seed=int(rng.integers(2**31)), measures=())
        if res.epsilon_certified < 1:
            out.append((g, res.graph_s, res.epsilon_certified))
    return out


def example1():
    return gen.two_component_cut(20, 100, 7)


def example2():
    return gen.exp_decay(100, 1.0, 0.05)


# 1 -------------------------------------------------------------------------


def test_criterion_1_foster_identity():
    t0 = time.perf_counter()
    worst = 0.0
    for g in random_graphs(100, 101, (2, 100)):
        s = effective_resistances(g).foster_sum(g)
        worst = max(worst, abs(s - (g.n - 1)) / (g.n - 1))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 5
    verdict(1, ok, f"max rel dev {worst:.2e}, {elapsed:.2f}s")
    assert ok


# 2 -------------------------------------------------------------------------


def test_criterion_2_measure_axioms():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    graphs = random_graphs(50, 202, (3, 30))
    bad = []
    for g in graphs:
        L = laplacian(g)
        descs = catalog(g)
        kappa = float(rng.uniform(0.2, 5.0))
        i, j = rng.choice(g.n, 2, replace=False)
        h = g.with_edge(int(i), int(j), float(rng.uniform(0.1, 2.0)))
        other = laplacian(gen.random_connected(g.n, int(rng.integers(2**31))))
        c = float(rng.uniform())
        for d in descs:
            base = d(L)
            if d.rescaled(kappa)(kappa * L) != pytest.approx(kappa ** (-d.order(g.n)) * base, rel=1e-9):
                bad.append(("homogeneity", d.name))
            if d(h) > base + 1e-12 * max(1.0, abs(base)):
                bad.append(("monotone", d.name))
            if d(c * L + (1 - c) * other) > c * base + (1 - c) * d(other) + 1e-9:
                bad.append(("convex", d.name))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 30
    verdict(2, ok, f"{len(graphs)} instances x {len(catalog(graphs[0]))} measures, {len(bad)} violations, {elapsed:.1f}s")
    assert ok, bad[:10]


@pytest.mark.xfail(strict=True, reason="entropy at a fixed gamma is homogeneous only when gamma scales with kappa")
def test_criterion_2_gamma_entropy_fixed_gamma_literal():
    g = gen.random_connected(12, 5)
    L = laplacian(g)
    d = parse_measure("gamma", g)
    kappa = 3.0
    lhs, rhs = d(kappa * L), kappa ** (-1) * d(L)
    ok = lhs == pytest.approx(rhs, rel=1e-9)
    verdict("2b", ok, f"gamma-entropy with gamma held fixed: {lhs:.6g} vs {rhs:.6g} (expected to fail)")
    assert ok


# 3 -------------------------------------------------------------------------


def test_criterion_3_closed_forms():
    graphs = random_graphs(10, 303, (3, 30))
    errs = {"theta2": 0.0, "locdev": 0.0, "uvol": 0.0, "theta4": 0.0}
    for g in graphs:
        L = laplacian(g)
        errs["theta2"] = max(errs["theta2"], abs(hp_norm(L, 2) - h2_norm(L)) / h2_norm(L))
        Lp = np.linalg.pinv(L)
        D2 = np.diag(1.0 / np.diag(L) ** 2)
        ref = 0.5 * np.trace(Lp @ L @ D2 @ L)
        errs["locdev"] = max(errs["locdev"], abs(local_deviation(L) - ref) / ref)
        ref = lyapunov_uncertainty_volume(L)
        errs["uvol"] = max(errs["uvol"], abs(uncertainty_volume(L) - ref) / ref)
        ref = quad_hp_norm(L, 4.0)
        errs["theta4"] = max(errs["theta4"], abs(hp_norm(L, 4.0) - ref) / ref)
    tol = {"theta2": 1e-10, "locdev": 1e-9, "uvol": 1e-6, "theta4": 1e-4}
    ok = all(errs[k] <= tol[k] for k in tol)
    verdict(3, ok, ", ".join(f"{k} {v:.1e}" for k, v in errs.items()))
    assert ok


# 4 -------------------------------------------------------------------------


def test_criterion_4_loss_within_epsilon():
    rng = np.random.default_rng(404)
    worst = -math.inf
    pairs = certified_pairs(50, 404)
    for g, gs, eps in pairs:
        L, Ls = laplacian(g), laplacian(gs)
        for d in catalog(g):
            if d.scale_params is None:
                worst = max(worst, relative_loss(d, L, Ls) - eps)
        Lp, Lsp = np.linalg.pinv(L), np.linalg.pinv(Ls)
        for _ in range(100):
            v = rng.standard_normal(g.n)
            v -= v.mean()
            a, b = v @ Lp @ v, v @ Lsp @ v
            worst = max(worst, abs(a - b) / b - eps)
    ok = worst <= 1e-9
    verdict(4, ok, f"{len(pairs)} pairs, homogeneous catalog measures and 100 probes each, max(loss - eps*) = {worst:.3g}")
    assert ok


@pytest.mark.xfail(strict=True, reason="entropy at a fixed gamma is not homogeneous, so the loss guarantee does not cover it")
def test_criterion_4_gamma_entropy_fixed_gamma():
    worst = -math.inf
    for g, gs, eps in certified_pairs(50, 404):
        d = parse_measure("gamma", g)
        worst = max(worst, relative_loss(d, laplacian(g), laplacian(gs)) - eps)
    ok = worst <= 1e-9
    verdict("4b", ok, f"gamma-entropy with gamma held fixed, max(loss - eps*) = {worst:.3g} (expected to fail)")
    assert ok


# 5 -------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_5_success_probability():
    t0 = time.perf_counter()
    details = []
    ok = True
    for name, g in (("G(100,600)", gen.gnm_random(100, 600, 505)), ("exp-decay", example2())):
        pi = sampling_distribution(g)
        d = 18 * 0.5 ** -2 * math.log(g.n)
        hits = sum(abstract(g, d, seed=s, pi=pi, measures=()).epsilon_certified <= 0.5 for s in range(200))
        p = binomtest(hits, 200, 0.5, alternative="greater").pvalue
        ok &= hits / 200 >= 0.5 and p < 0.05
        details.append(f"{name} {hits}/200 (p={p:.1e})")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300
    verdict(5, ok, "; ".join(details) + f", {elapsed:.1f}s")
    assert ok


# 6 -------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_6_example_reproduction():
    seeds = range(20)
    g1 = example1()
    pi1 = sampling_distribution(g1)
    table = [parse_measure(m, g1) for m in TABLE_MEASURES]
    links1, loss_ok1 = [], True
    for s in seeds:
        res = abstract(g1, 3.05, seed=s, budget="links", pi=pi1, measures=())
        links1.append(res.distinct_links)
        loss_ok1 &= all(relative_loss(d, g1, res.graph_s) <= res.epsilon_certified + 1e-9 for d in table)
    g2 = example2()
    pi2 = sampling_distribution(g2)
    links2, err_ok2, eps2 = [], True, []
    h2 = h2_norm(g2)
    for s in seeds:
        res = abstract(g2, 22.28, seed=s, budget="links", pi=pi2, measures=())
        links2.append(res.distinct_links)
        eps2.append(res.epsilon_certified)
        if res.epsilon_certified < 1:
            err_ok2 &= h2_error_exact(g2, res.graph_s) / h2 <= relative_h2_error_bound(res.epsilon_certified)
        else:
            err_ok2 = False
    m1, m2 = float(np.median(links1)), float(np.median(links2))
    ok = 55 <= m1 <= 75 and loss_ok1 and 950 <= m2 <= 1300 and err_ok2
    verdict(6, ok, f"example 1 median links {m1:g}, losses<=eps* {loss_ok1}; "
                   f"example 2 median links {m2:g}, median eps* {np.median(eps2):.3f}, H2 error within bound {err_ok2}")
    assert ok


# 7 -------------------------------------------------------------------------


def test_criterion_7_bound_chain():
    worst = -math.inf
    pairs = certified_pairs(100, 707, (10, 30))
    for g, gs, eps in pairs:
        exact = h2_error_exact(g, gs)
        trace = h2_error_trace_bound(g, gs)
        top = relative_h2_error_bound(eps) * h2_norm(g)
        worst = max(worst, exact - trace, trace - top - 1e-8)
    curve = relative_h2_error_bound(0.5)
    ok = worst <= 1e-10 and abs(curve - 1.18322) <= 1e-5 and abs(curve - math.sqrt(1.4)) <= 1e-12
    verdict(7, ok, f"{len(pairs)} pairs, worst slack {worst:.3g}, bound(0.5) = {curve:.6f}")
    assert ok


# 8 -------------------------------------------------------------------------


def test_criterion_8_monte_carlo():
    t0 = time.perf_counter()
    k3, p3 = gen.complete(3), gen.path(3)
    a = simulate_first_order(k3, trials=8, seed=801)
    b = simulate_first_order(p3, trials=8, seed=802)
    c = simulate_second_order(k3, 1.0, trials=8, seed=803)
    checks = {
        "H2^2(K3)": (within(a.h2_sq_estimate, a.h2_sq_se, 1 / 3), a.h2_sq_estimate),
        "locdev(P3)": (within(b.local_dev_estimate, b.local_dev_se, 1.25), b.local_dev_estimate),
        "Theta2^2(K3)": (within(c.h2_sq_estimate, c.h2_sq_se, 1 / 9), c.h2_sq_estimate),
    }
    g = gen.gnm_random(20, 80, 804)
    res = abstract_until(g, 0.6, seed=804, measures=())
    pair = simulate_pair_error(g, res.graph_s, trials=8, seed=805)
    bound = output_error_bound(g, res.epsilon_certified)
    checks["pair<=bound"] = (res.certified and pair.output_error_estimate <= bound, pair.output_error_estimate)
    elapsed = time.perf_counter() - t0
    ok = all(v[0] for v in checks.values()) and elapsed < 120
    verdict(8, ok, ", ".join(f"{k} {v[1]:.4g}" for k, v in checks.items()) + f" (bound {bound:.4g}), {elapsed:.1f}s")
    assert ok


# 9 -------------------------------------------------------------------------


def test_criterion_9_tradeoff():
    bad = []
    for g in random_graphs(50, 909, (3, 30)):
        for d in catalog(g):
            if not tradeoff_check(d, g).holds:
                bad.append((g.n, d.name))
    n = 12
    t = tradeoff_check(parse_measure("zeta:1"), gen.complete(n))
    ratio = t.lhs_l0 / t.rhs_l0
    ok = not bad and ratio == pytest.approx(n / 2, rel=1e-12)
    verdict(9, ok, f"{len(bad)} violations, K_{n} zeta_1 lhs/rhs = {ratio:.15g}")
    assert ok, bad[:10]


# 10 ------------------------------------------------------------------------


def dense_over_ring(n=60, seed=0):
    ring = gen.cycle(n)
    dense = gen.gnm_random(n, 900, seed)
    dense = WeightedGraph.from_edges(n, [e for e in dense.edges() if e[:2] not in ring.edge_set()])
    return ring, dense


def test_criterion_10_localized_and_parallel():
    ring, dense = dense_over_ring(seed=1010)
    loc = abstract_localized(ring, dense, 0.5, seed=10)
    part = loc.parts[0]
    ok_loc = loc.epsilon_global <= 0.5 and part.graph_s.total_weight() <= (1 + part.epsilon_local) * dense.total_weight() + 1e-9
    g = gen.two_component_cut(20, 100, 7)
    bridge = WeightedGraph.from_edges(40, [(19, 20, 1.0)])
    left = WeightedGraph.from_edges(40, [e for e in g.edges() if e[1] < 20])
    right = WeightedGraph.from_edges(40, [e for e in g.edges() if e[0] >= 20])
    net = PartitionedNetwork(bridge, (left, right))
    worst = -math.inf
    for s in range(50):
        res = abstract_parallel(net, 0.9, seed=s, max_retries=0)
        worst = max(worst, res.epsilon_global - res.epsilon_parts_max)
    ok = ok_loc and worst <= 1e-9
    verdict(10, ok, f"localized eps*_global {loc.epsilon_global:.3f}; parallel max(eps_g - max eps_i) {worst:.3g}")
    assert ok


# 11 ------------------------------------------------------------------------


def test_criterion_11_sparsity_demo():
    rep = demo_report(RegularizationInstance(10, 1.0, 2.0))
    ok = (
        abs(rep["l1"]["cost"] - 18) <= 1e-9
        and abs(rep["l1"]["remaining_weight"] - 0.05) <= 1e-12
        and rep["l1"]["nonzeros"] == 90
        and rep["l0"]["nonzeros"] == 18
        and rep["lower_bounds_coincide"]
        and abs(rep["l0"]["infimum"] - 18) <= 1e-12
        and abs(rep["l1"]["cost_evaluated"] - 18) <= 1e-9
    )
    verdict(11, ok, f"l1 cost {rep['l1']['cost']:.12g}, weight {rep['l1']['remaining_weight']:.12g}, "
                    f"nonzeros {rep['l1']['nonzeros']} vs {rep['l0']['nonzeros']}")
    assert ok


# 12 ------------------------------------------------------------------------


def test_criterion_12_determinism(tmp_path):
    src = tmp_path / "g.txt"
    write_edgelist(gen.gnm_random(60, 500, 1212), src)
    blobs = []
    for run, threads in enumerate(("1", "1", "8", "8")):
        out = tmp_path / f"r{run}.json"
        code = cli_main(["abstract", str(src), "--epsilon", "0.5", "--seed", "12", "--threads", threads, "--out", str(out)])
        assert code == 0
        blobs.append(out.read_bytes())
    ok = len(set(blobs)) == 1
    verdict(12, ok, f"{len(blobs)} runs, {len(set(blobs))} distinct outputs")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
