import numpy as np
import pytest

from boundstate_lab.atoms import AtomModel, hydrogenic_state
from boundstate_lab.fockspace import LatticeConfig, PairPotential, solve_pair_problem
from boundstate_lab.processes import pseudo_spectrum


@pytest.fixture(scope="session")
def model():
    return AtomModel()


@pytest.fixture(scope="session")
def basis(model):
    return pseudo_spectrum(model)


@pytest.fixture(scope="session")
def s1s(model):
    return hydrogenic_state(model, "1s")


@pytest.fixture(scope="session")
def s2p(model):
    return hydrogenic_state(model, "2p", 0)


def make_lattice(L, depth, a, repulsion=1.0):
    cfg = LatticeConfig(L, PairPotential.square_well(L, depth, 1, repulsion=repulsion), separation_a=a)
    return cfg, solve_pair_problem(cfg)


@pytest.fixture(scope="session")
def ring8():
    return make_lattice(8, 8.0, 3)


@pytest.fixture(scope="session")
def ring4():
    return make_lattice(4, 6.0, 2)


def hydrogen_oscillator_strength(n):
    """Absorption oscillator strength 1s -> np in closed form."""
    n = np.asarray(n, dtype=float)
    return 2.0**8 * n**5 * (n - 1) ** (2 * n - 4) / (3.0 * (n + 1) ** (2 * n + 4))
