import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"

# L at 45 degrees: arm along +45 deg of length 3*sqrt(2), arm along -45 deg of length 2*sqrt(2)
L45 = np.array([(0, 0), (1, 1), (2, 2), (3, 3), (1, -1), (2, -2)], dtype=float)


@pytest.fixture
def l45():
    return L45.copy()


def axis_l(long_arm=5.0, short_arm=2.0, step=0.1):
    """Exact axis-aligned L with the corner at the origin, arms along +x and +y."""
    xs = np.arange(0.0, long_arm + 1e-9, step)
    ys = np.arange(step, short_arm + 1e-9, step)
    return np.vstack([np.column_stack((xs, np.zeros_like(xs))), np.column_stack((np.zeros_like(ys), ys))])


def heading_error(a, b, period=math.pi / 2):
    d = math.fmod(a - b, period)
    d = abs(d)
    return min(d, period - d)


@pytest.fixture
def fixture_json():
    import json

    def load(name):
        return json.loads((FIXTURES / name).read_text())

    return load


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
