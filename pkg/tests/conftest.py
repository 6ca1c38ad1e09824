import math

import numpy as np
import pytest

from acspin.operators import DriveWaveform, SystemSpec
from acspin.thermal import ThermalParams

SQRT2 = math.sqrt(2)


@pytest.fixture
def fig1_spec():
    """Single spin at the reference working point, drive sqrt(2) cos(w t)."""
    return SystemSpec.single(3.0, math.pi / 4, DriveWaveform.cosine(SQRT2, 1.5))


@pytest.fixture
def pair_spec():
    """Easy-plane ferromagnetic pair, Jx = Jy = 5, Jz = 0."""
    return SystemSpec.pair(3.0, math.pi / 4, DriveWaveform.cosine(SQRT2, 1.5), (5.0, 5.0, 0.0))


@pytest.fixture
def fig1_thermal():
    return ThermalParams(beta=10.0, nu=0.1)


def random_density_matrix(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
