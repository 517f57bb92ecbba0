"""Monte Carlo simulation of noisy consensus networks.

Euler-Maruyama stepping with unit-intensity white noise. Each trial ``k``
draws its noise from ``default_rng(SeedSequence([seed, k]))`` in chunks, so
results do not depend on the backend or on how trials are scheduled. The
noise is centered across nodes; this leaves every centered statistic
unchanged in law and keeps the state on the disagreement subspace.

Defaults: ``dt = 0.01 / fastest mode rate``, ``t_burn = 10 / slowest rate``,
``t_total = t_burn + 200 / slowest rate``. The explicit scheme carries a
bias of order ``rate * dt / 2``, so a coarser ``dt`` shows up as a
systematic error well above the standard error.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .measures import view

CHUNK = 4096


class SimulationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SimulationStats:
    """Time-averaged steady-state statistics, mean and standard error over trials.

    ``h2_sq_estimate`` is the centered output power: ``E||M_n x||^2`` for
    first-order runs and the centered position power for second-order runs.
    ``local_dev_estimate`` is the summed squared local deviation (of states
    or of velocities). Statistics a run does not produce are ``nan``.
    """

    h2_sq_estimate: float
    h2_sq_se: float
    local_dev_estimate: float
    local_dev_se: float
    output_error_estimate: float
    output_error_se: float
    velocity_sq_estimate: float
    velocity_sq_se: float
    dt: float
    t_burn: float
    t_total: float
    trials: int
    seed: object
    backend: str
    final_disagreement: float
    per_trial: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "per_trial"}
        return out


def _child(seed, k):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(k)]))


def _timing(fast, slow, dt, t_burn, t_total):
    if dt is None:
        dt = 0.01 / fast
    if t_burn is None:
        t_burn = 10.0 / slow
    if t_total is None:
        t_total = t_burn + 200.0 / slow
    if not (dt > 0 and t_burn >= 0 and t_total > t_burn):
        raise SimulationError("need dt > 0 and t_total > t_burn >= 0")
    return float(dt), float(t_burn), float(t_total)


def _steps(dt, t_burn, t_total):
    burn = int(math.ceil(t_burn / dt - 1e-9))
    rec = max(1, int(math.ceil((t_total - t_burn) / dt - 1e-9)))
    return burn, rec


def _noise(rng, steps, n, dt, enabled):
    if not enabled:
        return np.zeros((steps, n))
    z = rng.standard_normal((steps, n))
    z -= z.mean(axis=1, keepdims=True)
    z *= math.sqrt(dt)
    return z


def _run_trials(fn, trials, threads):
    if threads > 1 and trials > 1:
        with ThreadPoolExecutor(int(threads)) as pool:
            return list(pool.map(fn, range(trials)))
    return [fn(k) for k in range(trials)]


def _drive(step, n_acc, burn, rec, rng, n, dt, noise):
    """Advance ``step(noise_chunk, record, acc)`` through burn-in and recording."""
    acc = np.zeros(n_acc)
    for total, record in ((burn, False), (rec, True)):
        done = 0
        while done < total:
            k = min(CHUNK, total - done)
            step(_noise(rng, k, n, dt, noise), record, acc)
            done += k
    return acc / rec


def _mean_se(samples):
    a = np.asarray(samples, dtype=np.float64)
    if a.size == 0:
        return math.nan, math.nan
    se = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else math.nan
    return float(a.mean()), se


def _centered_sq(x):
    y = x - x.mean()
    return float(y @ y)


def _check_trials(trials):
    if int(trials) < 1:
        raise SimulationError("need at least one trial")
    return int(trials)


def simulate_first_order(
    g,
    dt=None,
    t_total=None,
    t_burn=None,
    trials: int = 8,
    seed=0,
    *,
    threads: int = 1,
    x0=None,
    noise: bool = True,
    use_numba=None,
) -> SimulationStats:
    """Simulate ``dx = -L x dt + dW`` and time-average ``||M_n x||^2``.

    Requires ``dt < 1 / lambda_n``.
    """
    v = view(g)
    lam = v.positive_eigenvalues()
    dt, t_burn, t_total = _timing(lam[-1], lam[0], dt, t_burn, t_total)
    if not dt * lam[-1] < 1:
        raise SimulationError(f"dt={dt:g} too large: need dt < 1/lambda_n = {1 / lam[-1]:g}")
    trials = _check_trials(trials)
    L = np.ascontiguousarray(v.matrix)
    dinv = 1.0 / np.diag(L)
    n = v.n
    burn, rec = _steps(dt, t_burn, t_total)
    start = np.zeros(n) if x0 is None else np.asarray(x0, dtype=np.float64)

    def trial(k):
        rng = _child(seed, k)
        x = start.copy()

        def step(z, record, acc):
            _kernels.step_first_order(L, dinv, x, z, dt, record, acc, use_numba=use_numba)

        means = _drive(step, 2, burn, rec, rng, n, dt, noise)
        return means, _centered_sq(x)

    out = _run_trials(trial, trials, threads)
    h2 = [o[0][0] for o in out]
    loc = [o[0][1] for o in out]
    h2_m, h2_se = _mean_se(h2)
    loc_m, loc_se = _mean_se(loc)
    nan = math.nan
    return SimulationStats(
        h2_m, h2_se, loc_m, loc_se, nan, nan, nan, nan,
        dt, t_burn, t_total, trials, seed, _kernels.backend() if use_numba is None else ("numba" if use_numba else "numpy"),
        float(np.mean([o[1] for o in out])),
        {"h2_sq": np.array(h2), "local_dev": np.array(loc)},
    )


def second_order_roots(lam, beta):
    """Both roots of ``s^2 + beta lam s + lam`` per mode (complex array, shape (k, 2))."""
    lam = np.asarray(lam, dtype=np.complex128)
    disc = np.sqrt((beta * lam) ** 2 - 4 * lam)
    return np.stack([(-beta * lam + disc) / 2, (-beta * lam - disc) / 2], axis=1)


def simulate_second_order(
    g,
    beta: float = 1.0,
    dt=None,
    t_total=None,
    t_burn=None,
    trials: int = 8,
    seed=0,
    *,
    threads: int = 1,
    noise: bool = True,
    use_numba=None,
) -> SimulationStats:
    """Simulate ``dx = v dt``, ``dv = (-L x - beta L v) dt + dW``.

    Reports the centered position power (steady state
    ``(2 beta)^-1 sum lambda_i^-2``), the centered velocity power
    (``(2 beta)^-1 sum lambda_i^-1``) and the summed squared velocity local
    deviation.
    """
    if not beta > 0:
        raise SimulationError("beta must be positive")
    v = view(g)
    lam = v.positive_eigenvalues()
    roots = second_order_roots(lam, beta)
    fast = float(np.abs(roots).max())
    slow = float((-roots.real).min())
    # explicit Euler is stable for root s iff dt < -2 Re(s) / |s|^2
    stable = float((-2 * roots.real / np.abs(roots) ** 2).min())
    dt, t_burn, t_total = _timing(fast, slow, dt, t_burn, t_total)
    if not dt < stable:
        raise SimulationError(f"dt={dt:g} too large: explicit stepping needs dt < {stable:g}")
    trials = _check_trials(trials)
    L = np.ascontiguousarray(v.matrix)
    dinv = 1.0 / np.diag(L)
    n = v.n
    burn, rec = _steps(dt, t_burn, t_total)

    def trial(k):
        rng = _child(seed, k)
        x = np.zeros(n)
        vel = np.zeros(n)

        def step(z, record, acc):
            _kernels.step_second_order(L, dinv, beta, x, vel, z, dt, record, acc, use_numba=use_numba)

        means = _drive(step, 3, burn, rec, rng, n, dt, noise)
        return means, _centered_sq(x)

    out = _run_trials(trial, trials, threads)
    pos = [o[0][0] for o in out]
    velo = [o[0][1] for o in out]
    loc = [o[0][2] for o in out]
    pos_m, pos_se = _mean_se(pos)
    vel_m, vel_se = _mean_se(velo)
    loc_m, loc_se = _mean_se(loc)
    nan = math.nan
    return SimulationStats(
        pos_m, pos_se, loc_m, loc_se, nan, nan, vel_m, vel_se,
        dt, t_burn, t_total, trials, seed, _kernels.backend() if use_numba is None else ("numba" if use_numba else "numpy"),
        float(np.mean([o[1] for o in out])),
        {"h2_sq": np.array(pos), "velocity_sq": np.array(velo), "local_dev": np.array(loc)},
    )


def simulate_pair_error(
    L,
    Ls,
    dt=None,
    t_total=None,
    t_burn=None,
    trials: int = 8,
    seed=0,
    *,
    threads: int = 1,
    use_numba=None,
) -> SimulationStats:
    """Drive two first-order networks with one noise path; average ``||y - y_s||^2``."""
    v, vs = view(L), view(Ls)
    if v.n != vs.n:
        raise SimulationError("networks must share a node set")
    lam, lams = v.positive_eigenvalues(), vs.positive_eigenvalues()
    fast = max(lam[-1], lams[-1])
    slow = min(lam[0], lams[0])
    dt, t_burn, t_total = _timing(fast, slow, dt, t_burn, t_total)
    if not dt * fast < 1:
        raise SimulationError(f"dt={dt:g} too large: need dt < {1 / fast:g}")
    trials = _check_trials(trials)
    A = np.ascontiguousarray(v.matrix)
    B = np.ascontiguousarray(vs.matrix)
    n = v.n
    burn, rec = _steps(dt, t_burn, t_total)

    def trial(k):
        rng = _child(seed, k)
        x = np.zeros(n)
        xs = np.zeros(n)

        def step(z, record, acc):
            _kernels.step_pair(A, B, x, xs, z, dt, record, acc, use_numba=use_numba)

        means = _drive(step, 1, burn, rec, rng, n, dt, True)
        return means, _centered_sq(x - xs)

    out = _run_trials(trial, trials, threads)
    err = [o[0][0] for o in out]
    m, se = _mean_se(err)
    nan = math.nan
    return SimulationStats(
        nan, nan, nan, nan, m, se, nan, nan,
        dt, t_burn, t_total, trials, seed, _kernels.backend() if use_numba is None else ("numba" if use_numba else "numpy"),
        float(np.mean([o[1] for o in out])),
        {"output_error": np.array(err)},
    )


def write_csv(stats: SimulationStats, path) -> None:
    """Per-trial estimates: ``trial`` then one column per statistic."""
    names = list(stats.per_trial)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", *names])
        for k in range(stats.trials):
            w.writerow([k, *(format(float(stats.per_trial[c][k]), ".17g") for c in names)])
