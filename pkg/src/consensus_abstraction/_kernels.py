"""Hot loops: categorical sample counting and Euler-Maruyama stepping.

Each kernel has a numba version and a numpy version with the same
semantics. Numba is used when importable unless the environment variable
``CONSENSUS_ABSTRACTION_NO_NUMBA`` is set to a non-empty value other than
``0``. Sample counts agree exactly between the two; stepping results agree
to rounding.
"""
from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "CONSENSUS_ABSTRACTION_NO_NUMBA"


def _numba_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "") not in ("", "0")


try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


# -- numpy reference versions ------------------------------------------------


def _sample_counts_np(cdf, u):
    idx = np.searchsorted(cdf, u, side="right")
    np.minimum(idx, cdf.size - 1, out=idx)
    return np.bincount(idx, minlength=cdf.size).astype(np.int64)


def _centered_sq(x):
    y = x - x.mean()
    return float(y @ y)


def _first_order_np(L, dinv, x, noise, dt, record, acc):
    for k in range(noise.shape[0]):
        x -= dt * (L @ x)
        x += noise[k]
        if record:
            acc[0] += _centered_sq(x)
            e = dinv * (L @ x)
            acc[1] += float(e @ e)
    return x


def _pair_np(L, Ls, x, xs, noise, dt, record, acc):
    for k in range(noise.shape[0]):
        x -= dt * (L @ x)
        xs -= dt * (Ls @ xs)
        x += noise[k]
        xs += noise[k]
        if record:
            acc[0] += _centered_sq(x - xs)
    return x, xs


def _second_order_np(L, dinv, beta, x, v, noise, dt, record, acc):
    for k in range(noise.shape[0]):
        a = -(L @ x) - beta * (L @ v)
        x += dt * v
        v += dt * a
        v += noise[k]
        if record:
            acc[0] += _centered_sq(x)
            acc[1] += _centered_sq(v)
            e = dinv * (L @ v)
            acc[2] += float(e @ e)
    return x, v


# -- numba versions ----------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _sample_counts_nb(cdf, u):
        m = cdf.size
        counts = np.zeros(m, dtype=np.int64)
        for t in range(u.size):
            # first index with cdf[idx] > u[t], same as searchsorted(side="right")
            lo, hi = 0, m
            ut = u[t]
            while lo < hi:
                mid = (lo + hi) >> 1
                if cdf[mid] <= ut:
                    lo = mid + 1
                else:
                    hi = mid
            if lo > m - 1:
                lo = m - 1
            counts[lo] += 1
        return counts

    @njit(cache=True, nogil=True)
    def _matvec(L, x, out):
        n = x.size
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += L[i, j] * x[j]
            out[i] = s

    @njit(cache=True, nogil=True)
    def _centered_sq_nb(x):
        n = x.size
        mu = 0.0
        for i in range(n):
            mu += x[i]
        mu /= n
        s = 0.0
        for i in range(n):
            s += (x[i] - mu) ** 2
        return s

    @njit(cache=True, nogil=True)
    def _first_order_nb(L, dinv, x, noise, dt, record, acc):
        n = x.size
        buf = np.empty(n)
        for k in range(noise.shape[0]):
            _matvec(L, x, buf)
            for i in range(n):
                x[i] += -dt * buf[i] + noise[k, i]
            if record:
                acc[0] += _centered_sq_nb(x)
                _matvec(L, x, buf)
                s = 0.0
                for i in range(n):
                    s += (dinv[i] * buf[i]) ** 2
                acc[1] += s
        return x

    @njit(cache=True, nogil=True)
    def _pair_nb(L, Ls, x, xs, noise, dt, record, acc):
        n = x.size
        buf = np.empty(n)
        bufs = np.empty(n)
        diff = np.empty(n)
        for k in range(noise.shape[0]):
            _matvec(L, x, buf)
            _matvec(Ls, xs, bufs)
            for i in range(n):
                x[i] += -dt * buf[i] + noise[k, i]
                xs[i] += -dt * bufs[i] + noise[k, i]
            if record:
                for i in range(n):
                    diff[i] = x[i] - xs[i]
                acc[0] += _centered_sq_nb(diff)
        return x, xs

    @njit(cache=True, nogil=True)
    def _second_order_nb(L, dinv, beta, x, v, noise, dt, record, acc):
        n = x.size
        bx = np.empty(n)
        bv = np.empty(n)
        for k in range(noise.shape[0]):
            _matvec(L, x, bx)
            _matvec(L, v, bv)
            for i in range(n):
                a = -bx[i] - beta * bv[i]
                x[i] += dt * v[i]
                v[i] += dt * a + noise[k, i]
            if record:
                acc[0] += _centered_sq_nb(x)
                acc[1] += _centered_sq_nb(v)
                _matvec(L, v, bv)
                s = 0.0
                for i in range(n):
                    s += (dinv[i] * bv[i]) ** 2
                acc[2] += s
        return x, v


def backend() -> str:
    return "numba" if HAVE_NUMBA and not _numba_disabled() else "numpy"


def _pick(nb_name, np_fn, use_numba):
    if use_numba is None:
        use_numba = backend() == "numba"
    if use_numba:
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable")
        return globals()[nb_name]
    return np_fn


def sample_counts(cdf, u, *, use_numba=None) -> np.ndarray:
    """Per-bin counts of ``u`` under cumulative-sum inversion of ``cdf``."""
    fn = _pick("_sample_counts_nb", _sample_counts_np, use_numba)
    return fn(np.ascontiguousarray(cdf, dtype=np.float64), np.ascontiguousarray(u, dtype=np.float64))


def step_first_order(L, dinv, x, noise, dt, record, acc, *, use_numba=None):
    return _pick("_first_order_nb", _first_order_np, use_numba)(L, dinv, x, noise, float(dt), bool(record), acc)


def step_pair(L, Ls, x, xs, noise, dt, record, acc, *, use_numba=None):
    return _pick("_pair_nb", _pair_np, use_numba)(L, Ls, x, xs, noise, float(dt), bool(record), acc)


def step_second_order(L, dinv, beta, x, v, noise, dt, record, acc, *, use_numba=None):
    fn = _pick("_second_order_nb", _second_order_np, use_numba)
    return fn(L, dinv, float(beta), x, v, noise, float(dt), bool(record), acc)
