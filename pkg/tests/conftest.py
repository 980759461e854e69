import sys

import numpy as np
import pytest

from degindex import BuildParams, build
from degindex.datasets import make_sift_like


def small_params(d=8, **kw):
    kw.setdefault("k_ext", 2 * d)
    kw.setdefault("k_opt", d)
    return BuildParams(d=d, **kw)


@pytest.fixture(scope="session")
def gauss16():
    return np.random.default_rng(7).standard_normal((600, 16)).astype(np.float32)


@pytest.fixture(scope="session")
def deg8(gauss16):
    """Settled DEG_8 over 600 random 16-d points. Treat as read-only."""
    return build(gauss16, small_params(8))


@pytest.fixture(scope="session")
def sift_small():
    return make_sift_like(3000, 100, seed=3)


@pytest.fixture(scope="session")
def sift_graph(sift_small):
    base, _ = sift_small
    return build(base, small_params(16))


@pytest.fixture
def deg8_copy(deg8):
    return deg8.copy()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
