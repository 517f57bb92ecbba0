"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py --n 100 --steps 20000 --samples 200000
"""
import argparse
import time

import numpy as np

from consensus_abstraction import _kernels
from consensus_abstraction.generators import gnm_random
from consensus_abstraction.graph import laplacian


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(n, steps, samples, repeat, seed):
    rng = np.random.default_rng(seed)
    g = gnm_random(n, min(n * (n - 1) // 2, 6 * n), seed)
    L = laplacian(g)
    dinv = 1.0 / np.diag(L)
    noise = rng.standard_normal((steps, n)) * 0.01
    dt = 0.01 / np.linalg.eigvalsh(L)[-1]
    pi = rng.dirichlet(np.ones(g.m))
    cdf = np.cumsum(pi)
    u = rng.random(samples)

    def first_order(flag):
        x = np.zeros(n)
        acc = np.zeros(2)
        _kernels.step_first_order(L, dinv, x, noise, dt, True, acc, use_numba=flag)

    def second_order(flag):
        x, v = np.zeros(n), np.zeros(n)
        acc = np.zeros(3)
        _kernels.step_second_order(L, dinv, 1.0, x, v, noise, dt, True, acc, use_numba=flag)

    def counts(flag):
        _kernels.sample_counts(cdf, u, use_numba=flag)

    rows = []
    for name, fn in (("first-order steps", first_order), ("second-order steps", second_order), ("sample counts", counts)):
        t_np = best_of(lambda: fn(False), repeat)
        if _kernels.HAVE_NUMBA:
            fn(True)  # compile outside the timed region
            t_nb = best_of(lambda: fn(True), repeat)
        else:
            t_nb = float("nan")
        rows.append((name, t_np, t_nb))
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--steps", type=int, default=20000)
    p.add_argument("--samples", type=int, default=200000)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    print(f"n={args.n} steps={args.steps} samples={args.samples} numba={'yes' if _kernels.HAVE_NUMBA else 'no'}")
    print(f"{'kernel':<20}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for name, t_np, t_nb in bench(args.n, args.steps, args.samples, args.repeat, args.seed):
        print(f"{name:<20}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}")


if __name__ == "__main__":
    main()
