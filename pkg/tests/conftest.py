import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from frontspeed.core import PeriodicCell, PeriodicMedium  # noqa: E402


@pytest.fixture(scope="session")
def line_medium():
    return PeriodicMedium.homogeneous(1, None, 1.0, 64)


@pytest.fixture(scope="session")
def plane_medium():
    return PeriodicMedium.homogeneous(2, None, 1.0, 32)


@pytest.fixture(scope="session")
def unit_line():
    return PeriodicCell((1.0,))


@pytest.fixture(scope="session")
def unit_square():
    return PeriodicCell((1.0, 1.0))
