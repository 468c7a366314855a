import numpy as np
import pytest

from fourphoton.fock import four_photon_state
from fourphoton.qccs import two_epr_state

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def psi4():
    return four_photon_state()


@pytest.fixture(scope="session")
def epr2():
    return two_epr_state()


def random_ket(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
