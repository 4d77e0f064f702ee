import numpy as np
import pytest

from revmeas.core import BipartiteState, bell_state, make_density, pure_state, random_state, tensor_product

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


@pytest.fixture
def bell():
    return bell_state()


@pytest.fixture
def classical_quantum():
    """(|00><00| + |11><11|) / 2"""
    return BipartiteState(make_density(np.diag([0.5, 0, 0, 0.5])), 2, 2)


@pytest.fixture
def product_state():
    return tensor_product(random_state(2, 2, 11), random_state(2, 2, 12))


def random_two_qubit(seed, rank=4):
    return BipartiteState(random_state(4, rank, seed), 2, 2)


def ket_dm(v):
    return pure_state(v)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
