import numpy as np
import pytest

import qwdc
from qwdc import _accel

ACCEPTANCE_LINES = []

BACKENDS = ["numba", "numpy"] if _accel.HAS_NUMBA else ["numpy"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    previous = qwdc.get_backend()
    qwdc.set_backend(request.param)
    yield request.param
    qwdc.set_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
