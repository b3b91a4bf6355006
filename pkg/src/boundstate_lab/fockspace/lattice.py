"""Occupation-number basis and sparse fermion operators on a periodic chain.

Jordan-Wigner order: species-1 sites 0..L-1 occupy bits 0..L-1, species-2
sites occupy bits L..2L-1.  A basis is the sorted array of admissible bit
patterns, so lookups are a binary search.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb

import numpy as np
import scipy.sparse as sp

from .._backend import density_energy, fermion_entries
from ..errors import CapExceeded, ValidationError

DEFAULT_CAP = 2_000_000


def minimal_image(d, nsites):
    """Representative of d mod L in [-L/2, L/2)."""
    return (np.asarray(d) + nsites // 2) % nsites - nsites // 2


@dataclass(frozen=True)
class PairPotential:
    """Interaction tables over the site difference d mod L.

    ``v12[d]`` acts between a species-1 particle at x and a species-2 particle
    at x - d.  Same-species tables have ``v[0] = 0``: a site never holds two
    fermions of one kind.
    """

    v11: np.ndarray
    v22: np.ndarray
    v12: np.ndarray

    def __post_init__(self):
        tabs = [np.array(t, dtype=float) for t in (self.v11, self.v22, self.v12)]
        n = tabs[0].size
        if any(t.size != n for t in tabs):
            raise ValidationError("potential tables must share the ring length")
        for t in tabs[:2]:
            if not np.allclose(t, np.roll(t[::-1], 1)):
                raise ValidationError("same-species tables must be even in d")
            t[0] = 0.0
        for name, t in zip(("v11", "v22", "v12"), tabs):
            t.setflags(write=False)
            object.__setattr__(self, name, t)

    @classmethod
    def square_well(cls, nsites, depth, width=1, repulsion=0.0, repulsion_width=None):
        """-depth on |y| <= width between species; +repulsion within range for like particles."""
        d = np.abs(minimal_image(np.arange(nsites), nsites))
        v12 = np.where(d <= width, -float(depth), 0.0)
        rw = width if repulsion_width is None else repulsion_width
        same = np.where((d >= 1) & (d <= rw), float(repulsion), 0.0)
        return cls(same, same.copy(), v12)

    @property
    def nsites(self):
        return self.v12.size

    @property
    def range(self):
        """Largest |d| with a nonzero entry in any table."""
        d = np.abs(minimal_image(np.arange(self.nsites), self.nsites))
        nz = (self.v11 != 0) | (self.v22 != 0) | (self.v12 != 0)
        return int(d[nz].max()) if nz.any() else 0


@dataclass(frozen=True)
class LatticeConfig:
    """Periodic chain with integer masses and a coarse-graining scale ``separation_a``."""

    sites: int
    potential: PairPotential
    mass1: int = 1
    mass2: int = 2
    separation_a: int = 4
    spacing: float = 1.0

    def __post_init__(self):
        if self.sites < 2 or self.sites % 2:
            raise ValidationError("the ring length must be an even number >= 2")
        if self.potential.nsites != self.sites:
            raise ValidationError("potential tables do not match the ring length")
        if int(self.mass1) != self.mass1 or int(self.mass2) != self.mass2 or min(self.mass1, self.mass2) < 1:
            raise ValidationError("lattice masses must be positive integers")
        if self.separation_a < 1:
            raise ValidationError("separation_a must be >= 1")
        if self.spacing != 1.0:
            raise ValidationError("the lattice spacing is fixed to 1")

    @property
    def M(self):
        return self.mass1 + self.mass2

    @property
    def mu(self):
        return self.mass1 * self.mass2 / self.M

    def refined_center(self, x1, x2):
        """M times the centre of mass of sites x1, x2 taken along the minimal image."""
        y = int(minimal_image(x1 - x2, self.sites))
        return self.M * x2 + self.mass1 * y

    def anchor(self, x1, x2):
        """Site nearest the centre of mass; composites are labelled by it."""
        y = int(minimal_image(x1 - x2, self.sites))
        return (x2 + (2 * self.mass1 * y + self.M) // (2 * self.M)) % self.sites

    def constituents(self, X, y):
        """Sites (x1, x2) of a pair with anchor X and relative displacement y."""
        y = int(minimal_image(y, self.sites))
        x2 = (X - (2 * self.mass1 * y + self.M) // (2 * self.M)) % self.sites
        return (x2 + y) % self.sites, x2

    def check_hierarchy(self, r0):
        if not self.separation_a > r0:
            raise ValidationError(
                f"separation_a = {self.separation_a} must exceed the bound-state radius {r0}"
            )


def basis_size(nsites, max_n1, max_n2):
    return sum(comb(nsites, k) for k in range(max_n1 + 1)) * sum(
        comb(nsites, k) for k in range(max_n2 + 1)
    )


def _patterns(nsites, nmax, shift):
    out = []
    for k in range(nmax + 1):
        for occ in combinations(range(nsites), k):
            out.append(sum(1 << (s + shift) for s in occ))
    return np.array(out, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class LatticeFockSpace:
    config: LatticeConfig
    max_n1: int
    max_n2: int
    basis: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.basis.size

    @property
    def nsites(self):
        return self.config.sites

    def index(self, pattern):
        i = int(np.searchsorted(self.basis, pattern))
        if i >= self.dim or self.basis[i] != pattern:
            raise KeyError(pattern)
        return i

    def vacuum(self):
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(0)] = 1.0
        return v

    @cached_property
    def occupations(self):
        """(n1, n2) particle numbers of every basis state."""
        L = self.nsites
        mask1 = (1 << L) - 1
        n1 = np.bitwise_count(self.basis & mask1).astype(int)
        n2 = np.bitwise_count(self.basis >> L).astype(int)
        return n1, n2

    def interior(self):
        """Mask of states on which truncation cannot spoil the algebra."""
        n1, n2 = self.occupations
        return (n1 < self.max_n1) & (n2 < self.max_n2)


def enumerate_basis(config, max_n1, max_n2, cap=DEFAULT_CAP):
    """All occupation patterns with at most max_n1 and max_n2 particles."""
    L = config.sites
    if not (0 <= max_n1 <= L and 0 <= max_n2 <= L):
        raise ValidationError("particle caps must lie in [0, L]")
    size = basis_size(L, max_n1, max_n2)
    if size > cap:
        raise CapExceeded(f"basis of {size} states exceeds the cap of {cap}")
    p1 = _patterns(L, max_n1, 0)
    p2 = _patterns(L, max_n2, L)
    basis = np.sort((p1[:, None] | p2[None, :]).ravel())
    return LatticeFockSpace(config, max_n1, max_n2, basis)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Sparse operator on a :class:`LatticeFockSpace` (or any basis)."""

    space: object
    entries: sp.csr_matrix = field(repr=False)

    @property
    def H(self):
        return OperatorMatrix(self.space, self.entries.conj().T.tocsr())

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(self.space, (self.entries @ other.entries).tocsr())
        return self.entries @ other

    def __add__(self, other):
        return OperatorMatrix(self.space, (self.entries + other.entries).tocsr())

    def __sub__(self, other):
        return OperatorMatrix(self.space, (self.entries - other.entries).tocsr())

    def __mul__(self, scalar):
        return OperatorMatrix(self.space, (self.entries * scalar).tocsr())

    __rmul__ = __mul__

    def toarray(self):
        return self.entries.toarray()

    def norm(self):
        """Largest absolute entry (0 for the zero operator)."""
        e = self.entries
        return float(np.abs(e.data).max()) if e.nnz else 0.0


def anticommutator(a, b):
    return a @ b + b @ a


def commutator(a, b):
    return a @ b - b @ a


def identity(space):
    return OperatorMatrix(space, sp.identity(space.dim, dtype=complex, format="csr"))


def mode_index(space, species, site):
    if species not in (1, 2):
        raise ValidationError("species must be 1 or 2")
    if not 0 <= site < space.nsites:
        raise ValidationError(f"site {site} outside [0, {space.nsites})")
    return site + (species - 1) * space.nsites


def field_operator(space, species, site, dagger=False):
    """psi_i(x) or its adjoint, with Jordan-Wigner signs."""
    mode = mode_index(space, species, site)
    rows, cols, vals = fermion_entries(space.basis, mode, dagger)
    m = sp.csr_matrix((vals.astype(complex), (rows, cols)), shape=(space.dim, space.dim))
    return OperatorMatrix(space, m)


def number_operator(space, species, site=None):
    """n_i(x), or the total number of species i when ``site`` is None."""
    L = space.nsites
    shift = (species - 1) * L
    if site is None:
        mask = ((1 << L) - 1) << shift
        diag = np.bitwise_count(space.basis & mask).astype(float)
    else:
        diag = ((space.basis >> (site + shift)) & 1).astype(float)
    return OperatorMatrix(space, sp.diags(diag.astype(complex), format="csr"))


def potential_operator(space, v11=None, v22=None, v12=None):
    """Diagonal density-density interaction; defaults to the config tables."""
    pot = space.config.potential
    tabs = [pot.v11 if v11 is None else v11, pot.v22 if v22 is None else v22,
            pot.v12 if v12 is None else v12]
    diag = density_energy(space.basis, space.nsites, *tabs)
    return OperatorMatrix(space, sp.diags(diag.astype(complex), format="csr"))


def kinetic_operator(space):
    """-(1/2m) times the lattice Laplacian for both species."""
    L = space.nsites
    cfg = space.config
    total = None
    for species, mass in ((1, cfg.mass1), (2, cfg.mass2)):
        t = 1.0 / (2.0 * mass)
        ann = [field_operator(space, species, x) for x in range(L)]
        for x in range(L):
            hop = ann[x].H @ ann[(x + 1) % L]
            term = (hop + hop.H) * (-t) + (ann[x].H @ ann[x]) * (2 * t)
            total = term if total is None else total + term
    return total


def exact_hamiltonian(space):
    """Microscopic lattice Hamiltonian: kinetic plus all pair interactions."""
    return kinetic_operator(space) + potential_operator(space)
