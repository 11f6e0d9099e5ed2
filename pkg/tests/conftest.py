import numpy as np
import pytest

from dickeqme import ModelParams, ReservoirParams
from dickeqme.oracle import FockTruncation, dissipator_numeric_oracle, dressed_subspace_check

ACCEPTANCE_LINES = []


@pytest.fixture
def p_default():
    return ModelParams(n_atoms=16, omega_c=400.0, lam=10.0, gamma=100.0)


@pytest.fixture
def r_default():
    return ReservoirParams(eta=0.125, beta=0.02)


@pytest.fixture(scope="session")
def dissipator_report():
    p = ModelParams(n_atoms=4, omega_c=400.0, lam=10.0, gamma=100.0)
    return dissipator_numeric_oracle(p, ReservoirParams(eta=0.125, beta=0.02))


@pytest.fixture(scope="session")
def subspace_report():
    p = ModelParams(n_atoms=4, omega_c=400.0, lam=10.0, gamma=100.0)
    return dressed_subspace_check(p, FockTruncation(n_max=40))


def random_hermitian(rng, n):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return x + x.conj().T


def random_density(rng, n):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = x @ x.conj().T
    return rho / np.trace(rho)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
