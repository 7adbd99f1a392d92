import numpy as np
import pytest

from kummerlab.coble_duality import EmbeddingContext
from kummerlab.curve_model import default_curve
from kummerlab.periods import compute_periods

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def curve():
    return default_curve()


@pytest.fixture(scope="session")
def periods(curve):
    return compute_periods(curve)


@pytest.fixture(scope="session")
def ctx(periods):
    return EmbeddingContext(periods, 42)


@pytest.fixture
def rng(request):
    # one stream per test, stable across runs and independent of test order
    import zlib
    return np.random.default_rng(zlib.crc32(request.node.nodeid.encode()))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
