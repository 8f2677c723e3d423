from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from photonflow import GratingSpec
from photonflow.polarization import PolarizationSpec

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

WAVELENGTH = 500e-9
K = 2 * math.pi / WAVELENGTH
PITCH = 10e-6
WIDTH = 5e-6
SCREEN = 1e-3

# filled by the acceptance tests, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def grating():
    return GratingSpec(2, WIDTH, PITCH)


@pytest.fixture(scope="session")
def circular():
    return PolarizationSpec(1.0, 1.0, math.pi / 2)


@pytest.fixture(scope="session")
def linear():
    return PolarizationSpec(1.0, 1.0, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
