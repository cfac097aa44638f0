import sys
from importlib import resources
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vqebench.integrals import build_fermion_hamiltonian, load_integrals, spatial_to_spin  # noqa: E402
from vqebench.pauli import jordan_wigner  # noqa: E402

DATA = Path(str(resources.files("vqebench") / "data"))

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def h2_ints():
    return load_integrals(DATA / "h2_sto3g.txt")


@pytest.fixture(scope="session")
def h2_ham(h2_ints):
    return jordan_wigner(build_fermion_hamiltonian(h2_ints), 4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_two_electron(seed: int):
    """4-spin-orbital, 2-electron integral set from random spatial integrals."""
    from oracles import random_spatial_integrals

    r = np.random.default_rng(seed)
    h, eri, enuc = random_spatial_integrals(2, r)
    return spatial_to_spin(h, eri, enuc, 2), (h, eri, enuc)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
