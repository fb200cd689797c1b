import sys
import numpy as np
import pytest

from cpbath.geometry import to_projective
from cpbath.hamiltonians import HermitianOperator

REF_AMPS = np.sqrt([0.4, 0.4, 0.0, 0.2])


def random_hermitian(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return HermitianOperator(scale * (a + a.conj().T) / 2)


def random_amplitudes(rng, n):
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    return a / np.linalg.norm(a)


def random_state(rng, n, pivot=None):
    a = random_amplitudes(rng, n)
    if pivot is None:
        pivot = int(np.argmax(np.abs(a)))
    return to_projective(a, pivot)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ref_state():
    return to_projective(REF_AMPS, 3)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.REPORT, key=lambda s: s.split(":")[0]):
        terminalreporter.write_line(line)
