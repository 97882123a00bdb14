import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from topodown.raster import BinaryImage  # noqa: E402


def img(*rows):
    return BinaryImage.from_strings(rows)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria record one line each here; printed after the run
CRITERIA: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n])
