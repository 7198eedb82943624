import sys

import numpy as np
import pytest

from dyadiclab import _kernels

AVAILABLE = [b for b in _kernels.BACKENDS if b != "numba" or _kernels.HAVE_NUMBA]


@pytest.fixture(params=AVAILABLE)
def backend(request):
    """Run the test once per kernel backend."""
    old = _kernels.get_backend()
    _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(old)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
