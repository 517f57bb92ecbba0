import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from consensus_abstraction import generators  # noqa: E402
from consensus_abstraction.spectral import clear_cache  # noqa: E402


def random_graphs(count, seed, n_range=(4, 30)):
    """Connected random weighted graphs, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        out.append(generators.random_connected(n, int(rng.integers(2**32))))
    return out


@pytest.fixture(autouse=True)
def _fresh_cache():
    yield
    clear_cache()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=mod.sort_key):
        terminalreporter.write_line(line)
