"""Relative-motion problem of one species-1 / species-2 pair on the ring."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import NoBoundState
from .lattice import minimal_image


@dataclass(frozen=True)
class PairState:
    label: int
    energy: float
    phi: np.ndarray = field(repr=False)  # indexed by y mod L

    @property
    def bound(self):
        return self.energy < 0


@dataclass(frozen=True)
class PairSpectrum:
    """Eigenstates of -(1/2 mu) Laplacian + v12 on the relative coordinate."""

    states: tuple
    r0: int
    threshold: float

    @property
    def bound(self):
        return tuple(s for s in self.states if s.bound)

    @property
    def energies(self):
        return np.array([s.energy for s in self.states])

    def __getitem__(self, label):
        return self.states[label]

    def gram(self):
        phi = np.array([s.phi for s in self.states])
        return phi.conj() @ phi.T


def relative_hamiltonian(config):
    L = config.sites
    t = 1.0 / (2.0 * config.mu)
    H = np.diag(np.full(L, 2 * t) + config.potential.v12)
    for y in range(L):
        H[y, (y + 1) % L] -= t
        H[(y + 1) % L, y] -= t
    return H


def overlap_radius(phi, nsites, threshold=1e-3):
    """Largest |y| at which |phi(y)| still reaches ``threshold``."""
    d = np.abs(minimal_image(np.arange(nsites), nsites))
    big = np.abs(phi) >= threshold
    return int(d[big].max()) if big.any() else 0


def solve_pair_problem(config, threshold=1e-3):
    """Diagonalize the relative Hamiltonian of one pair.

    On the ring the zero-total-momentum sector of two particles with hopping
    1/(2 m_i) is exactly this problem, since 1/(2 m1) + 1/(2 m2) = 1/(2 mu).

    Raises
    ------
    NoBoundState
        If the lowest level is not negative.
    """
    H = relative_hamiltonian(config)
    e, v = np.linalg.eigh(H)
    if e[0] >= 0:
        raise NoBoundState(f"lowest pair level {e[0]:.6g} is not below threshold 0")
    states = []
    for i in range(e.size):
        phi = v[:, i].copy()
        j = int(np.argmax(np.abs(phi) > 1e-8))
        if phi[j] < 0:
            phi = -phi
        phi.setflags(write=False)
        states.append(PairState(i, float(e[i]), phi))
    r0 = overlap_radius(states[0].phi, config.sites, threshold)
    return PairSpectrum(tuple(states), r0, threshold)
