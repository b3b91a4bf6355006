"""Transition form factors g_ab(k), gvec_ab(k) and q_ab(k).

The integrals over the relative coordinate carry the phases
exp(i k.y m2/M) for particle 1 and exp(-i k.y m1/M) for particle 2.  They
are done by brute-force 3-D quadrature: a log-spaced trapezoid rule in r
times Gauss-Legendre in cos(theta) times a uniform rule in phi.
"""

from dataclasses import dataclass
import warnings

import numpy as np
from scipy.special import sph_harm_y

from ..errors import QuadratureNotConverged
from .angular import unit_vector_element
from .radial import RadialGrid


class LongWaveWarning(UserWarning):
    """|k| r0 exceeds the long-wave threshold."""


@dataclass(frozen=True)
class FormFactor:
    k: np.ndarray
    g: complex
    gvec: np.ndarray
    q: complex

    def combination(self, polarization):
        """e . gvec, the amplitude entering radiative transitions."""
        return complex(np.dot(polarization, self.gvec))


class SphereMesh:
    """Product quadrature on R^3 in spherical coordinates."""

    def __init__(self, r_max, n_r=320, n_theta=24, n_phi=48, r_min=1e-6):
        self.radial = RadialGrid(r_min, r_max, n_r)
        x, wx = np.polynomial.legendre.leggauss(n_theta)
        self.theta = np.arccos(x)
        self.phi = np.arange(n_phi) * (2 * np.pi / n_phi)
        self.w_ang = (wx[:, None] * np.full(n_phi, 2 * np.pi / n_phi)[None, :])
        t, p = np.meshgrid(self.theta, self.phi, indexing="ij")
        self.unit = np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)])
        self._t, self._p = t, p
        self._ylm = {}

    def ylm(self, l, m):
        key = (l, m)
        if key not in self._ylm:
            self._ylm[key] = sph_harm_y(l, m, self._t, self._p)
        return self._ylm[key]

    @property
    def w_rad(self):
        # volume element r^2 dr
        return self.radial.weights * self.radial.r**2

    def wavefunction(self, state):
        """phi(r, Omega) on the mesh, shape (n_r, n_theta, n_phi)."""
        r = self.radial.r
        R = state.radial.u(r) / r
        return R[:, None, None] * self.ylm(state.l, state.m)[None]

    def gradient(self, state):
        """Cartesian gradient of phi, shape (3, n_r, n_theta, n_phi)."""
        r = self.radial.r
        u, du = state.radial.u(r), state.radial.du(r)
        R = u / r
        dR = (du - R) / r
        l, m = state.l, state.m
        out = np.zeros((3, r.size) + self._t.shape, dtype=complex)
        up = dR - l * R / r
        down = dR + (l + 1) * R / r
        for lp, radial_part in ((l + 1, up), (l - 1, down)):
            if lp < 0:
                continue
            for mp in range(-lp, lp + 1):
                coeff = unit_vector_element(lp, mp, l, m)
                if not coeff.any():
                    continue
                y = self.ylm(lp, mp)
                for i in range(3):
                    if coeff[i] != 0:
                        out[i] += coeff[i] * radial_part[:, None, None] * y[None]
        return out

    def integrate(self, f):
        return np.einsum("...rtp,r,tp->...", f, self.w_rad, self.w_ang)


def _mesh_radius(model, a, b):
    size = max(model.size(a.n), model.size(b.n))
    rmax = (40.0 / max(a.n, b.n) + 12.0) * size
    for s in (a, b):
        if s.mode == "grid":
            rmax = min(rmax, s.radial.grid.r_max)
    return rmax


class TransitionDensity:
    """Charge and current densities of the pair (a, b) tabulated on a mesh.

    Evaluating at many wavevectors only costs the phase factors.
    """

    def __init__(self, a, b, model, mesh):
        self.model, self.mesh = model, mesh
        fa, fb = mesh.wavefunction(a), mesh.wavefunction(b)
        ga, gb = mesh.gradient(a), mesh.gradient(b)
        self.density = np.conj(fa) * fb
        self.current = np.conj(fa)[None] * gb - np.conj(ga) * fb[None]

    def at(self, k):
        model, mesh = self.model, self.mesh
        k = np.asarray(k, dtype=float)
        kdoty = np.einsum("i,itp->tp", k, mesh.unit)[None] * mesh.radial.r[:, None, None]
        p1 = np.exp(1j * model.frac2 * kdoty)
        p2 = np.exp(-1j * model.frac1 * kdoty)
        inv1 = 1.0 / model.m1
        inv2 = 0.0 if np.isinf(model.m2) else 1.0 / model.m2
        w_charge = model.e1 * p1 + model.e2 * p2
        w_current = model.e1 * inv1 * p1 - model.e2 * inv2 * p2
        w_q = model.e1**2 * inv1 * p1 + model.e2**2 * inv2 * p2
        g = complex(mesh.integrate(w_charge * self.density))
        gvec = np.asarray(-0.5j * mesh.integrate(w_current[None] * self.current), dtype=complex)
        q = complex(mesh.integrate(w_q * self.density))
        return FormFactor(k=k, g=g, gvec=gvec, q=q)


def transition_density(a, b, model, resolution=(320, 24, 48)):
    n_r, n_t, n_p = resolution
    return TransitionDensity(a, b, model, SphereMesh(_mesh_radius(model, a, b), n_r, n_t, n_p))


def form_factors(a, b, model, k, resolution=(320, 24, 48), check=True, tol=1e-8,
                 long_wave_threshold=0.3):
    """Scalar, vector and diamagnetic transition form factors.

    Parameters
    ----------
    a, b : BoundState
        Bra and ket states.
    model : AtomModel
    k : array_like, shape (3,)
        Photon (or momentum-transfer) wavevector in a.u.
    resolution : tuple
        (n_r, n_theta, n_phi) of the product quadrature.
    check : bool
        Repeat at 1.5x resolution and raise :class:`QuadratureNotConverged`
        if any component moves by more than ``tol`` (absolute, scaled by the
        magnitude of the result when that exceeds one).

    Returns
    -------
    FormFactor
    """
    k = np.asarray(k, dtype=float).reshape(3)
    r0 = max(model.size(a.n), model.size(b.n))
    if np.linalg.norm(k) * r0 > long_wave_threshold:
        warnings.warn(
            f"|k| r0 = {np.linalg.norm(k) * r0:.3g} exceeds {long_wave_threshold}; "
            "long-wave expansion not valid",
            LongWaveWarning,
            stacklevel=2,
        )
    coarse = transition_density(a, b, model, resolution).at(k)
    if not check:
        return coarse
    n_r, n_t, n_p = resolution
    fine = transition_density(a, b, model, (int(n_r * 1.5), int(n_t * 1.5), int(n_p * 1.5))).at(k)
    a1 = np.concatenate([[coarse.g], coarse.gvec, [coarse.q]])
    a2 = np.concatenate([[fine.g], fine.gvec, [fine.q]])
    scale = max(1.0, float(np.max(np.abs(a2))))
    if np.max(np.abs(a1 - a2)) > tol * scale:
        raise QuadratureNotConverged(
            f"form factors changed by {np.max(np.abs(a1 - a2)):.3g} under mesh refinement"
        )
    return fine
