import math

import numpy as np
import pytest

from annulus_hardy.kernel import AnnulusGeometry

S_2PI = math.exp(-2 * math.pi)
RADII_S = [0.3, 0.5, 0.7, S_2PI]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=RADII_S, ids=lambda s: f"s={s:.4g}")
def geom(request):
    return AnnulusGeometry(request.param)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
