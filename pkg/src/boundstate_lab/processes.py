"""Radiative and collisional observables of a two-body atom.

Spontaneous emission, photon scattering (Kramers-Heisenberg form with the
seagull term R' and its cancelling partner Q), electron-atom Born amplitudes
and the static dipole polarizability.  Photon box normalization factors are
reduced analytically, so no quantization volume appears anywhere.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math
import warnings

import numpy as np

from .atoms import AtomModel, PseudoSpectrum, RadialGrid, dipole_matrix, form_factors
from .atoms.angular import unit_vector_element
from .atoms.formfactor import LongWaveWarning, transition_density
from .errors import (
    BasisTooSmall,
    DegenerateDenominator,
    NotDownhill,
    ResonanceHit,
    ValidationError,
    ZeroMomentumTransfer,
)
from .units import SPEED_OF_LIGHT, rate_to_per_second

C = SPEED_OF_LIGHT


# --------------------------------------------------------------------------
# photon modes


def transverse_basis(direction):
    """Two real orthonormal polarization vectors perpendicular to ``direction``."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    trial = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - n * np.dot(trial, n)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return e1, e2


@dataclass(frozen=True)
class PhotonMode:
    """Plane-wave photon with wavevector ``k`` and polarization ``polarization``."""

    k: np.ndarray
    polarization: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        e = np.asarray(self.polarization, dtype=complex)
        if abs(np.linalg.norm(e) - 1.0) > 1e-12:
            raise ValidationError("polarization must be a unit vector")
        if abs(np.dot(k, e)) > 1e-12 * max(1.0, np.linalg.norm(k)):
            raise ValidationError("polarization must be transverse to k")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "polarization", e)

    @property
    def omega(self):
        return C * float(np.linalg.norm(self.k))


def sphere_rule(n_theta=16, n_phi=32):
    """Directions and weights of a Gauss-Legendre x uniform rule on S^2."""
    x, w = np.polynomial.legendre.leggauss(n_theta)
    phi = np.arange(n_phi) * (2 * np.pi / n_phi)
    st = np.sqrt(1 - x**2)
    dirs = np.stack(
        [
            (st[:, None] * np.cos(phi)[None]).ravel(),
            (st[:, None] * np.sin(phi)[None]).ravel(),
            np.repeat(x, n_phi),
        ],
        axis=1,
    )
    weights = np.repeat(w, n_phi) * (2 * np.pi / n_phi)
    return dirs, weights


# --------------------------------------------------------------------------
# spontaneous emission


@dataclass(frozen=True)
class TransitionResult:
    initial: str
    final: str
    omega: float
    total_rate: float
    differential: object = field(repr=False, compare=False)
    form: str = "dipole"

    @property
    def rate_per_s(self):
        return rate_to_per_second(self.total_rate)


def photon_energy(delta, model, mass_mode):
    """Emitted photon energy for level spacing ``delta``.

    With recoil the atom at rest ends with momentum -k, so
    delta = omega + omega^2 / (2 M c^2).
    """
    if mass_mode == "infinite" or math.isinf(model.M):
        return delta
    if mass_mode != "finite":
        raise ValidationError("mass_mode must be 'finite' or 'infinite'")
    mc2 = model.M * C * C
    # stable root of omega^2/(2 mc2) + omega - delta = 0
    return 2.0 * delta / (1.0 + math.sqrt(1.0 + 2.0 * delta / mc2))


def emission_rate(initial, final, model, mass_mode="infinite", form="dipole",
                  directions=(16, 32), resolution=(200, 16, 32)):
    """Spontaneous emission rate from ``initial`` into the shell of ``final``.

    The final state's m sublevels are summed; the initial m is as given.

    Parameters
    ----------
    form : {'dipole', 'full'}
        'dipole' uses <f|e.d|i> (long-wave limit); 'full' integrates
        |e.gvec_fi(-k)|^2 over photon directions with the exact phases.
        The recoil term (p + p')/2M . e g vanishes for an atom at rest
        because the photon polarization is transverse to p' = -k.

    Returns
    -------
    TransitionResult
        ``differential(n)`` is dw/dOmega summed over polarizations and final m.
    """
    delta = initial.energy - final.energy
    if delta <= 0:
        raise NotDownhill(f"initial energy {initial.energy} is not above final {final.energy}")
    omega = photon_energy(delta, model, mass_mode)
    finals = [final.with_m(m) for m in range(-final.l, final.l + 1)]

    if form == "dipole":
        dips = [dipole_matrix(f, initial, model) for f in finals]
        d2 = sum(float(np.vdot(d, d).real) for d in dips)
        pref = omega**3 / (2 * np.pi * C**3)

        def differential(n):
            n = np.asarray(n, dtype=float)
            n = n / np.linalg.norm(n)
            return pref * sum(float(np.vdot(d, d).real - abs(np.dot(n, d)) ** 2) for d in dips)

        total = 4.0 * omega**3 * d2 / (3.0 * C**3)
    elif form == "full":
        dens = [transition_density(f, initial, model, resolution) for f in finals]
        pref = omega / (2 * np.pi * C**3)

        def differential(n):
            n = np.asarray(n, dtype=float)
            n = n / np.linalg.norm(n)
            k = -omega / C * n
            out = 0.0
            for td in dens:
                gv = td.at(k).gvec
                out += float(np.vdot(gv, gv).real - abs(np.dot(n, gv)) ** 2)
            return pref * out

        dirs, w = sphere_rule(*directions)
        total = float(sum(wi * differential(d) for d, wi in zip(dirs, w)))
    else:
        raise ValidationError("form must be 'dipole' or 'full'")
    return TransitionResult(initial.label, final.label, omega, total, differential, form)


def integrate_differential(result, directions=(16, 32)):
    dirs, w = sphere_rule(*directions)
    return float(sum(wi * result.differential(d) for d, wi in zip(dirs, w)))


# --------------------------------------------------------------------------
# sums over intermediate states


@lru_cache(maxsize=8)
def pseudo_spectrum(model=AtomModel(), l_values=(0, 1), grid=RadialGrid(), e_max=100.0):
    """Cached finite-box spectrum; see :class:`PseudoSpectrum`."""
    return PseudoSpectrum.build(model, l_values, grid, e_max)


def _intermediate_dipoles(alpha, basis, model):
    """Energies and dipole vectors <beta|d|alpha> for every reachable beta.

    Returns a list of (energies, vectors) blocks, vectors of shape (n_beta, 3).
    Degenerate copies of alpha itself are the caller's concern.
    """
    blocks = []
    if isinstance(basis, PseudoSpectrum):
        grid = basis.grid
        ua = alpha.radial.u(grid.r) * grid.weights * grid.r
        for lb in (alpha.l - 1, alpha.l + 1):
            if lb < 0 or lb not in basis.energies:
                continue
            radial = ua @ basis.radial[lb]
            for mb in range(-lb, lb + 1):
                ang = unit_vector_element(lb, mb, alpha.l, alpha.m)
                if not ang.any():
                    continue
                vec = model.dipole_charge * radial[:, None] * ang[None, :]
                blocks.append((basis.energies[lb], vec))
    else:
        states = [b for b in basis if abs(b.l - alpha.l) == 1]
        if states:
            e = np.array([b.energy for b in states])
            vec = np.array([dipole_matrix(b, alpha, model) for b in states])
            blocks.append((e, vec))
    return blocks


def _tensor_blocks(alpha, alpha_prime, basis, model):
    """Pairs (eps_beta, <alpha'|d|beta>, <beta|d|alpha>) over shared beta."""
    out = []
    if isinstance(basis, PseudoSpectrum):
        grid = basis.grid
        for lb in sorted(basis.energies):
            if abs(lb - alpha.l) != 1 or abs(lb - alpha_prime.l) != 1:
                continue
            ra = (alpha.radial.u(grid.r) * grid.weights * grid.r) @ basis.radial[lb]
            rp = (alpha_prime.radial.u(grid.r) * grid.weights * grid.r) @ basis.radial[lb]
            for mb in range(-lb, lb + 1):
                a_in = unit_vector_element(lb, mb, alpha.l, alpha.m)
                a_out = unit_vector_element(alpha_prime.l, alpha_prime.m, lb, mb)
                if not (a_in.any() and a_out.any()):
                    continue
                d_in = model.dipole_charge * ra[:, None] * a_in[None]
                d_out = model.dipole_charge * rp[:, None] * a_out[None]
                out.append((basis.energies[lb], d_out, d_in))
    else:
        states = [b for b in basis if abs(b.l - alpha.l) == 1 and abs(b.l - alpha_prime.l) == 1]
        if states:
            e = np.array([b.energy for b in states])
            d_in = np.array([dipole_matrix(b, alpha, model) for b in states])
            d_out = np.array([dipole_matrix(alpha_prime, b, model) for b in states])
            out.append((e, d_out, d_in))
    return out


# --------------------------------------------------------------------------
# photon scattering


@dataclass(frozen=True)
class ScatteringKernel:
    """Photon scattering amplitudes for one pair of polarizations.

    ``R`` is assembled as ``Rprime + Rdoubleprime`` where ``Rdoubleprime``
    is ``Q + R_dipole``.  ``Q`` takes its closed form -(e^2/mu)(e'*.e) delta,
    which cancels ``Rprime``; ``Q_sum`` is the same quantity evaluated as a
    sum over the basis, kept to measure how complete the basis is.
    """

    omega: float
    omega_prime: float
    Rprime: complex
    Rdoubleprime: complex
    R: complex
    R_dipole: complex
    Q: complex
    Q_sum: complex
    tensor: np.ndarray = field(repr=False)
    cross_section: float = 0.0
    regularized: bool = False


def _check_denominators(den, delta, i_epsilon):
    if i_epsilon is None and den.size and np.min(np.abs(den)) < delta:
        raise ResonanceHit(
            f"energy denominator {np.min(np.abs(den)):.3g} Ha within {delta} of a pole; "
            "pass i_epsilon to regularize (not part of the second-order formula)"
        )


def scattering_tensor(alpha, alpha_prime, omega, model, basis, resonance_delta=1e-4,
                      i_epsilon=None):
    """Kramers-Heisenberg tensor T with R_dipole = e'*_i T_ij e_j.

    Also returns the tensor S with Q_sum = e'*_i S_ij e_j.
    """
    omega_p = omega + alpha.energy - alpha_prime.energy
    if omega_p <= 0:
        raise ValidationError("outgoing photon energy must be positive")
    T = np.zeros((3, 3), dtype=complex)
    S = np.zeros((3, 3), dtype=complex)
    reg = 0.0 if i_epsilon is None else 1j * i_epsilon
    e2 = model.dipole_charge**2
    for eb, d_out, d_in in _tensor_blocks(alpha, alpha_prime, basis, model):
        keep = np.abs(eb - alpha.energy) > 1e-10
        eb, d_out, d_in = eb[keep], d_out[keep], d_in[keep]
        delta_b = alpha.energy - eb
        den1 = -omega_p + delta_b
        den2 = omega + delta_b
        _check_denominators(np.concatenate([den1, den2]), resonance_delta, i_epsilon)
        # term 1: (e . d_{a'b}) (e'* . d_{ba}) ; term 2: (e'* . d_{a'b}) (e . d_{ba})
        T += omega * omega_p * (
            np.einsum("b,bj,bi->ij", 1.0 / (den1 + reg), d_out, d_in)
            + np.einsum("b,bi,bj->ij", 1.0 / (den2 + reg), d_out, d_in)
        )
        y_out, y_in = d_out / model.dipole_charge, d_in / model.dipole_charge
        S += e2 * (
            np.einsum("b,bj,bi->ij", delta_b + omega, y_out, y_in)
            + np.einsum("b,bi,bj->ij", delta_b - omega_p, y_out, y_in)
        )
    return T, S, omega_p


def photon_scattering(alpha, alpha_prime, omega, polarizations, model, basis,
                      resonance_delta=1e-4, i_epsilon=None):
    """Second-order photon scattering amplitude alpha -> alpha'.

    Parameters
    ----------
    alpha, alpha_prime : BoundState
        Initial and final atomic states.
    omega : float
        Incoming photon energy (a.u.); the outgoing one follows from energy
        conservation with the atomic kinetic energy neglected.
    polarizations : (e, e_prime)
        Incoming and outgoing polarization vectors.
    basis : PseudoSpectrum or sequence of BoundState
        Intermediate states.
    resonance_delta : float
        Refuse (ResonanceHit) when a denominator is closer than this to zero.
    i_epsilon : float, optional
        Width added to the denominators; this regularization is not part of
        the second-order formula and is flagged in the result.

    Returns
    -------
    ScatteringKernel
    """
    e_in, e_out = (np.asarray(p, dtype=complex) for p in polarizations)
    T, S, omega_p = scattering_tensor(alpha, alpha_prime, omega, model, basis,
                                      resonance_delta, i_epsilon)
    same = alpha is alpha_prime or (
        alpha.n == alpha_prime.n and alpha.l == alpha_prime.l and alpha.m == alpha_prime.m
        and alpha.energy == alpha_prime.energy
    )
    e2_mu = model.dipole_charge**2 / model.mu
    r_prime = complex(e2_mu * np.dot(np.conj(e_out), e_in)) if same else 0j
    q_closed = -r_prime
    r_dip = complex(np.conj(e_out) @ T @ e_in)
    q_sum = complex(np.conj(e_out) @ S @ e_in)
    r_dd = q_closed + r_dip
    R = r_prime + r_dd
    sigma = (omega_p / omega) * abs(R) ** 2 / C**4
    return ScatteringKernel(omega, omega_p, r_prime, r_dd, R, r_dip, q_closed, q_sum, T,
                            sigma, i_epsilon is not None)


def total_cross_section(alpha, omega, polarization, model, basis, directions=(16, 32)):
    """Elastic cross section summed over outgoing polarizations and directions."""
    e_in = np.asarray(polarization, dtype=complex)
    T, _, omega_p = scattering_tensor(alpha, alpha, omega, model, basis)
    # R' + Q = 0, so the assembled amplitude is the dipole-form one
    dirs, w = sphere_rule(*directions)
    total = 0.0
    for n, wi in zip(dirs, w):
        for e_out in transverse_basis(n):
            total += wi * abs(np.conj(e_out) @ T @ e_in) ** 2
    return (omega_p / omega) * total / C**4


def velocity_form_rdoubleprime(alpha, alpha_prime, omega, polarizations, model, states):
    """R'' from momentum matrix elements over an explicit list of states.

    Used only to check the length/velocity equivalence on small bases.
    """
    from .atoms import momentum_matrix

    e_in, e_out = (np.asarray(p, dtype=complex) for p in polarizations)
    omega_p = omega + alpha.energy - alpha_prime.energy
    total = 0j
    for b in states:
        pa = momentum_matrix(alpha_prime, b)
        pb = momentum_matrix(b, alpha)
        delta_b = alpha.energy - b.energy
        total += np.dot(e_in, pa) * np.dot(np.conj(e_out), pb) / (-omega_p + delta_b)
        total += np.dot(np.conj(e_out), pa) * np.dot(e_in, pb) / (omega + delta_b)
    return complex(model.dipole_charge**2 / model.mu**2 * total)


# --------------------------------------------------------------------------
# electron-atom scattering


def electron_atom_amplitude(alpha, alpha_prime, q, model, long_wave_threshold=0.3):
    """First Born amplitude 4 pi i e (q . d_{alpha' alpha}) / q^2.

    The projectile is a free particle of the first kind (charge e1); the
    dipole form is the long-wave limit of :func:`electron_atom_amplitude_exact`.
    """
    q = np.asarray(q, dtype=float).reshape(3)
    q2 = float(np.dot(q, q))
    if q2 == 0.0:
        raise ZeroMomentumTransfer("momentum transfer q = 0 makes the Coulomb amplitude singular")
    r0 = max(model.size(alpha.n), model.size(alpha_prime.n))
    if math.sqrt(q2) * r0 > long_wave_threshold:
        warnings.warn(f"|q| r0 = {math.sqrt(q2) * r0:.3g} outside the long-wave regime",
                      LongWaveWarning, stacklevel=2)
    d = dipole_matrix(alpha_prime, alpha, model)
    return complex(4j * np.pi * model.e1 * np.dot(q, d) / q2)


def electron_atom_amplitude_exact(alpha, alpha_prime, q, model, **kwargs):
    """Born amplitude with the full phases: (4 pi e1 / q^2) g_{alpha' alpha}(-q).

    With nu_11 = -nu_21 = 4 pi e^2/q^2 the bracket of the one-composite
    interaction kernel is exactly e1 times the charge form factor at -q.
    Its long-wave limit is -4 pi i e (q . d)/q^2: the overall sign differs
    from the dipole-form expression, a phase that no observable sees.
    """
    q = np.asarray(q, dtype=float).reshape(3)
    q2 = float(np.dot(q, q))
    if q2 == 0.0:
        raise ZeroMomentumTransfer("momentum transfer q = 0 makes the Coulomb amplitude singular")
    ff = form_factors(alpha_prime, alpha, model, -q, **kwargs)
    return complex(4 * np.pi * model.e1 * ff.g / q2)


# --------------------------------------------------------------------------
# static polarizability


def polarizability_terms(alpha, basis, model, component=2):
    """Energies and contributions 2 |<beta|d_i|alpha>|^2 / (eps_beta - eps_alpha)."""
    es, terms = [], []
    for eb, vec in _intermediate_dipoles(alpha, basis, model):
        w = np.abs(vec[:, component]) ** 2
        gap = eb - alpha.energy
        live = w > 0
        if np.any(np.abs(gap[live]) < 1e-10):
            raise DegenerateDenominator(
                f"state degenerate with {alpha.label} couples through the dipole operator"
            )
        es.append(eb[live])
        terms.append(2.0 * w[live] / gap[live])
    if not es:
        return np.zeros(0), np.zeros(0)
    es = np.concatenate(es)
    terms = np.concatenate(terms)
    order = np.argsort(es, kind="stable")
    return es[order], terms[order]


def static_polarizability(alpha, basis, model=AtomModel(), component=2, tail_tolerance=0.05):
    """alpha_pol = 2 sum_beta |<alpha|d_i|beta>|^2 / (eps_beta - eps_alpha).

    Raises
    ------
    BasisTooSmall
        When the highest tenth of the included states (by energy) still
        carries more than ``tail_tolerance`` of the sum.
    """
    es, terms = polarizability_terms(alpha, basis, model, component)
    total = float(np.sum(terms))
    if terms.size == 0:
        return 0.0
    tail = float(np.sum(terms[-max(1, terms.size // 10):]))
    if abs(tail) > tail_tolerance * abs(total):
        raise BasisTooSmall(
            f"last tenth of the basis contributes {tail / total:.2%} of the polarizability"
        )
    return total
