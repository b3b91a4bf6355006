"""Two-body Coulomb model: masses, charges and the derived combinations."""

import math
from dataclasses import dataclass

from ..errors import ValidationError
from ..units import PROTON_MASS_AU


@dataclass(frozen=True)
class AtomModel:
    """Two charged fermions bound by the Coulomb force.

    ``m2`` may be ``math.inf`` for a static second particle.  The relative
    coordinate is ``y = x1 - x2``; particle 1 sits at ``X + (m2/M) y`` and
    particle 2 at ``X - (m1/M) y`` relative to the centre of mass ``X``.
    """

    m1: float = 1.0
    m2: float = math.inf
    e1: float = 1.0
    e2: float = -1.0

    def __post_init__(self):
        if not (self.m1 > 0 and self.m2 > 0):
            raise ValidationError("masses must be positive")
        if math.isinf(self.m1):
            raise ValidationError("m1 must be finite (the light particle)")
        if not self.e1 * self.e2 < 0:
            raise ValidationError("charges must have opposite signs to bind")

    @classmethod
    def hydrogen(cls, finite_nucleus=False):
        return cls(m1=1.0, m2=PROTON_MASS_AU if finite_nucleus else math.inf)

    @classmethod
    def positronium(cls):
        return cls(m1=1.0, m2=1.0)

    @property
    def M(self):
        return self.m1 + self.m2

    @property
    def mu(self):
        if math.isinf(self.m2):
            return self.m1
        return self.m1 * self.m2 / (self.m1 + self.m2)

    @property
    def frac1(self):
        """m1/M, the weight of particle 1 in the centre of mass."""
        return 0.0 if math.isinf(self.m2) else self.m1 / self.M

    @property
    def frac2(self):
        """m2/M."""
        return 1.0 if math.isinf(self.m2) else self.m2 / self.M

    @property
    def charge(self):
        """Net charge e1 + e2."""
        return self.e1 + self.e2

    @property
    def neutral(self):
        return self.e1 + self.e2 == 0

    @property
    def z(self):
        """Coulomb strength Z in V(r) = -Z/r."""
        return -self.e1 * self.e2

    @property
    def dipole_charge(self):
        """Coefficient of y in the dipole moment about the centre of mass."""
        return self.e1 * self.frac2 - self.e2 * self.frac1

    @property
    def length_scale(self):
        """Bohr-type radius 1/(mu Z)."""
        return 1.0 / (self.mu * self.z)

    def energy(self, n):
        """Closed-form level ε_n = -mu Z^2 / (2 n^2)."""
        return -self.mu * self.z**2 / (2.0 * n * n)

    def potential(self, r):
        return self.e1 * self.e2 / r

    def size(self, n):
        """Characteristic radius n^2/(mu Z) of shell n."""
        return n * n * self.length_scale
