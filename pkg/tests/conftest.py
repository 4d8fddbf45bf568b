import math

import numpy as np
import pytest

from prepost import qcore, suter, weakmeas

ACCEPTANCE_LINES = []


def deg_pair(pre_deg, post_deg):
    return weakmeas.PrePostPair(suter.polarization_deg(pre_deg), suter.polarization_deg(post_deg))


@pytest.fixture
def amplifying_pair():
    """45 deg pre-selection, -44 deg post-selection: sigma_z weak value tan(89 deg)."""
    return deg_pair(45, -44)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def tan89():
    # <post|sigma_z|pre> / <post|pre> with real amplitudes, evaluated by hand
    c45, s45 = math.cos(math.radians(45)), math.sin(math.radians(45))
    c44, s44 = math.cos(math.radians(44)), math.sin(math.radians(44))
    return (c44 * c45 + s44 * s45) / (c44 * c45 - s44 * s45)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
