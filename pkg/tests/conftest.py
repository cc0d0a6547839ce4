import numpy as np
import pytest

from cvqe import fixtures
from cvqe.ansatz import enumerate_excitations, hf_determinant
from cvqe.fermion import build_qubit_hamiltonian


class System:
    def __init__(self, name):
        self.name = name
        self.ints = fixtures.load(name)
        self.meta = fixtures.provenance()[name]
        self.H = build_qubit_hamiltonian(self.ints)
        self.n_qubits = self.H.n_qubits
        self.n_electrons = self.ints.n_electrons
        self.excs = enumerate_excitations(self.n_electrons, self.n_qubits)
        self.hf = hf_determinant(self.n_electrons, self.n_qubits)


_CACHE = {}


def system(name):
    if name not in _CACHE:
        _CACHE[name] = System(name)
    return _CACHE[name]


@pytest.fixture(scope="session")
def h2():
    return system("h2_0.735")


@pytest.fixture(scope="session")
def h4():
    return system("h4_1.5")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
