import numpy as np
import pytest

from consensus_abstraction import _kernels
from consensus_abstraction.abstraction import abstract, sampling_distribution
from consensus_abstraction import generators as gen

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def test_sample_counts_backends_identical():
    rng = np.random.default_rng(0)
    pi = rng.dirichlet(np.ones(50))
    cdf = np.cumsum(pi)
    u = rng.random(10000)
    a = _kernels.sample_counts(cdf, u, use_numba=True)
    b = _kernels.sample_counts(cdf, u, use_numba=False)
    np.testing.assert_array_equal(a, b)
    assert a.sum() == 10000


def test_sample_counts_edges():
    cdf = np.array([0.25, 0.5, 0.999999])
    u = np.array([0.0, 0.25, 0.4999, 0.5, 0.9999995])
    for flag in (True, False):
        # ties go right; draws past a short last bin fall into it
        np.testing.assert_array_equal(_kernels.sample_counts(cdf, u, use_numba=flag), [1, 2, 2])


def test_abstraction_identical_under_both_backends(monkeypatch):
    g = gen.gnm_random(30, 200, 1)
    a = abstract(g, 4.0, seed=3, measures=())
    monkeypatch.setenv(_kernels.ENV_FLAG, "1")
    assert _kernels.backend() == "numpy"
    b = abstract(g, 4.0, seed=3, measures=())
    assert a.graph_s == b.graph_s
    monkeypatch.setenv(_kernels.ENV_FLAG, "0")
    assert _kernels.backend() == "numba"


def test_first_order_step_backends_agree():
    rng = np.random.default_rng(1)
    L = np.array([[2.0, -1, -1], [-1, 2, -1], [-1, -1, 2]])
    dinv = 1 / np.diag(L)
    noise = rng.standard_normal((500, 3)) * 0.05
    outs = []
    for flag in (True, False):
        x = np.zeros(3)
        acc = np.zeros(2)
        _kernels.step_first_order(L, dinv, x, noise, 0.01, True, acc, use_numba=flag)
        outs.append((x, acc))
    np.testing.assert_allclose(outs[0][0], outs[1][0], rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(outs[0][1], outs[1][1], rtol=1e-12)


def test_distribution_unchanged_by_backend():
    g = gen.complete(5)
    np.testing.assert_allclose(sampling_distribution(g), 0.1)
