"""Atom-atom coupling and van der Waals energies.

The Coulomb interaction between the four constituents of two atoms is
expanded in Cartesian multipoles about the separation vector R (from atom A
to atom B).  With s = r_B - r_A the Taylor series of 1/|R + s| gives

    G = sum_{a,b} (-1)^a / (a! b!)  D_{a+b}(R) . M_a^A M_b^B

where M_0 is the charge, M_1 the dipole and M_2 the second moment of each
atom's transition density, and D_p the p-th gradient of 1/R.  ``order``
counts the Taylor power minus one: order 1 is the dipole-dipole form,
order 2 adds the dipole-quadrupole terms.

Tensor index convention: ``G[d, g, a, b]`` = <a_A b_B| V |d_A g_B>, the
initial states first.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from ._backend import gap_weighted_sum
from .atoms import AtomModel, PseudoSpectrum, radial_integral
from .atoms.angular import second_moment_element, unit_vector_element
from .errors import DegenerateDenominator, SeparationTooSmall, ValidationError


class ProximityWarning(UserWarning):
    """R is inside three times the 99.9 % mass radius of an atom."""


# --------------------------------------------------------------------------
# multipole geometry


def gradient_tensors(R):
    """Gradients D_0..D_3 of 1/|R| as numpy arrays of rank 0..3."""
    R = np.asarray(R, dtype=float)
    r2 = float(R @ R)
    r = math.sqrt(r2)
    eye = np.eye(3)
    d0 = np.array(1.0 / r)
    d1 = -R / r**3
    d2 = (3 * np.outer(R, R) - r2 * eye) / r**5
    d3 = -15 * np.einsum("i,j,k->ijk", R, R, R) / r**7 + 3 * (
        np.einsum("i,jk->ijk", R, eye)
        + np.einsum("j,ik->ijk", R, eye)
        + np.einsum("k,ij->ijk", R, eye)
    ) / r**5
    return d0, d1, d2, d3


def quadrupole_charge(model):
    """Coefficient of y_i y_j in the second charge moment about the centre of mass."""
    return model.e1 * model.frac2**2 + model.e2 * model.frac1**2


def _terms(order, model_a, model_b):
    """(a, b, coefficient) triples of the truncated Taylor series."""
    if order not in (0, 1, 2):
        raise ValidationError("multipole order must be 0, 1 or 2")
    if order == 2 and not (model_a.neutral and model_b.neutral):
        # the p = 3 terms would also need octupole x charge
        raise ValidationError("order 2 is only complete for neutral atoms")
    out = []
    for p in range(order + 2):
        for a in range(min(p, 2) + 1):
            b = p - a
            if b > 2:
                continue
            out.append((a, b, (-1) ** a / (math.factorial(a) * math.factorial(b))))
    return out


def _contract(D, ma, mb, a, b):
    """D_{a+b} . M_a^A M_b^B with arbitrary leading batch axes on the moments."""
    idx_a = "ijk"[:a]
    idx_b = "ijk"[a:a + b]
    spec = f"{idx_a + idx_b},...{idx_a},...{idx_b}->..."
    if a + b == 0:
        return D * ma * mb
    return np.einsum(spec, D, ma, mb)


def check_separation(states, model, R):
    """Hard floor at 3 n^2/(mu Z); warning inside 3 x the 99.9 % mass radius."""
    dist = float(np.linalg.norm(R))
    n_top = max(s.n for s in states)
    r0 = model.size(n_top)
    if dist < 3 * r0:
        raise SeparationTooSmall(f"R = {dist:g} is below 3 r0 = {3 * r0:g}")
    reach = max(s.mass_radius(0.999) for s in states if s.mode == "analytic" or s.n <= 5)
    if dist < 3 * reach:
        warnings.warn(
            f"R = {dist:g} is within 3x the 99.9% mass radius ({reach:.3g}); "
            "charge overlap corrections are not in the multipole series",
            ProximityWarning,
            stacklevel=3,
        )


# --------------------------------------------------------------------------
# dense coupling tensor over explicit state lists


def moments(states, model):
    """Transition moments between every pair of ``states``.

    Returns a list [M0, M1, M2] with shapes (n, n), (n, n, 3), (n, n, 3, 3);
    entry [a, d] is <a| . |d>.
    """
    n = len(states)
    m0 = np.zeros((n, n), dtype=complex)
    m1 = np.zeros((n, n, 3), dtype=complex)
    m2 = np.zeros((n, n, 3, 3), dtype=complex)
    qd, qq = model.dipole_charge, quadrupole_charge(model)
    for i, a in enumerate(states):
        for j, d in enumerate(states):
            if a.l == d.l and a.m == d.m:
                m0[i, j] = model.charge * radial_integral(a, d, 0)
            ang1 = unit_vector_element(a.l, a.m, d.l, d.m)
            if ang1.any():
                m1[i, j] = qd * radial_integral(a, d, 1) * ang1
            ang2 = second_moment_element(a.l, a.m, d.l, d.m)
            if ang2.any():
                m2[i, j] = qq * radial_integral(a, d, 2) * ang2
    return [m0, m1, m2]


@dataclass(frozen=True)
class CouplingTensor:
    """G[d, g, a, b] for states_a (indices d, a) and states_b (g, b)."""

    G: np.ndarray = field(repr=False)
    R: np.ndarray
    order: int
    labels_a: tuple
    labels_b: tuple

    def element(self, d, g, a, b):
        ia, ib = self.labels_a.index, self.labels_b.index
        return complex(self.G[ia(d), ib(g), ia(a), ib(b)])


def coupling_tensor(states, model, R, order=1, states_b=None, model_b=None, check=True):
    """Multipole expansion of the atom-atom Coulomb coupling.

    Parameters
    ----------
    states : list of BoundState
        States of atom A (and of atom B unless ``states_b`` is given).
    model : AtomModel
    R : array_like, shape (3,)
        Vector from atom A to atom B.
    order : int
        0 keeps charge terms, 1 adds dipole-dipole, 2 dipole-quadrupole.

    Returns
    -------
    CouplingTensor
    """
    states_b = states if states_b is None else states_b
    model_b = model if model_b is None else model_b
    R = np.asarray(R, dtype=float).reshape(3)
    if check:
        check_separation(list(states) + list(states_b), model, R)
    D = gradient_tensors(R)
    mA = moments(states, model)
    mB = mA if (states_b is states and model_b is model) else moments(states_b, model_b)
    nA, nB = len(states), len(states_b)
    G = np.zeros((nA, nB, nA, nB), dtype=complex)
    for a, b, coeff in _terms(order, model, model_b):
        # mA[a] is indexed [final, initial, ...]; G wants [init_A, init_B, fin_A, fin_B]
        ma = mA[a][:, :, None, None]
        mb = mB[b][None, None, :, :]
        block = coeff * _contract(D[a + b], ma, mb, a, b)  # [fa, ia, fb, ib]
        G += block.transpose(1, 3, 0, 2)
    return CouplingTensor(G, R, order, tuple(s.label for s in states), tuple(s.label for s in states_b))


def first_order_energy(alpha, beta, R, model, order=1):
    """E1 = G_{alpha beta; alpha beta}(R), the diagonal coupling."""
    return coupling_tensor([alpha], model, R, order, states_b=[beta]).G[0, 0, 0, 0].real


def resonant_exchange(alpha, beta, R, model, order=1):
    """<beta_A alpha_B| V |alpha_A beta_B>, the excitation-swap element.

    For a 1s-2p pair this carries the 1/R^3 resonant interaction; the diagonal
    element (first_order_energy) vanishes for it in the multipole expansion.
    """
    t = coupling_tensor([alpha, beta], model, R, order)
    return complex(t.G[0, 1, 1, 0])


# --------------------------------------------------------------------------
# dipole-dipole kernel of the effective atom-atom Hamiltonian


@dataclass(frozen=True)
class DipoleDipoleKernel:
    """v(x) = (x^2 (d_ad . d_bg) - 3 (x . d_ad)(x . d_bg)) / |x|^5."""

    d_ad: np.ndarray
    d_bg: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        r2 = float(x @ x)
        da = np.asarray(self.d_ad)
        db = np.asarray(self.d_bg)
        return complex((r2 * np.dot(da, db) - 3 * np.dot(x, da) * np.dot(x, db)) / r2**2.5)


def dipole_kernel(alpha, delta, beta, gamma, model):
    """Kernel for the transition alpha <- delta on one atom, beta <- gamma on the other."""
    from .atoms import dipole_matrix

    return DipoleDipoleKernel(dipole_matrix(alpha, delta, model), dipole_matrix(beta, gamma, model))


# --------------------------------------------------------------------------
# second order


def _channel_blocks(alpha, basis, model, max_power):
    """Intermediate states of one atom grouped by (l, m).

    Returns {(l, m): (energies, [M0, M1, M2] stacks)} with moments
    <lambda| . |alpha> of shapes (n,), (n, 3), (n, 3, 3).
    """
    qd, qq = model.dipole_charge, quadrupole_charge(model)
    blocks = {}
    if isinstance(basis, PseudoSpectrum):
        grid = basis.grid
        ua = alpha.radial.u(grid.r) * grid.weights
        radial = {lb: {p: (ua * grid.r**p) @ basis.radial[lb] for p in range(max_power + 1)}
                  for lb in basis.energies}
        groups = {lb: (basis.energies[lb], radial[lb]) for lb in basis.energies}
    else:
        groups = {}
        for lb in sorted({s.l for s in basis}):
            radial_states = {}
            for s in basis:
                if s.l == lb and s.n not in radial_states:
                    radial_states[s.n] = s
            ordered = [radial_states[n] for n in sorted(radial_states)]
            e = np.array([s.energy for s in ordered])
            rad = {p: np.array([radial_integral(alpha, s, p) for s in ordered])
                   for p in range(max_power + 1)}
            groups[lb] = (e, rad)
    for lb, (e, rad) in groups.items():
        for mb in range(-lb, lb + 1):
            n = e.size
            m0 = np.zeros(n, dtype=complex)
            m1 = np.zeros((n, 3), dtype=complex)
            m2 = np.zeros((n, 3, 3), dtype=complex)
            if lb == alpha.l and mb == alpha.m:
                m0 = model.charge * rad[0].astype(complex)
            ang1 = unit_vector_element(lb, mb, alpha.l, alpha.m)
            if max_power >= 1 and ang1.any():
                m1 = qd * rad[1][:, None] * ang1[None]
            if max_power >= 2:
                ang2 = second_moment_element(lb, mb, alpha.l, alpha.m)
                if ang2.any():
                    m2 = qq * rad[2][:, None, None] * ang2[None]
            if m0.any() or m1.any() or m2.any():
                blocks[lb, mb] = (e, [m0, m1, m2])
    return blocks


def _skip_index(alpha, key, energies, tol=1e-6):
    if key != (alpha.l, alpha.m):
        return -1
    i = int(np.argmin(np.abs(energies - alpha.energy)))
    return i if abs(energies[i] - alpha.energy) < tol * max(1.0, abs(alpha.energy)) else -1


@dataclass
class VdwResult:
    """Energies of an atom pair at one separation."""

    R: float
    E0: float
    E1: float
    E2: float
    C6: float
    order: int
    channel_contributions: list = field(default_factory=list, repr=False)
    block_contributions: dict = field(default_factory=dict, repr=False)
    max_denominator: float = -np.inf


def second_order_energy(alpha, beta, R, model, basis, order=1, pair_cutoff=None,
                        n_channels=20, check=True):
    """Second-order energy E2 = sum' |G|^2 / (e_a + e_b - e_l - e_r).

    Parameters
    ----------
    alpha, beta : BoundState
        Unperturbed states of atoms A and B.
    R : float or array_like
        Separation; a scalar means R along z.
    basis : PseudoSpectrum or list of BoundState
        Intermediate states of each atom.
    order : int
        Multipole order of the coupling (1: dipole-dipole).
    pair_cutoff : float, optional
        Drop channels with e_l + e_r above this value.

    Returns
    -------
    VdwResult
        ``C6`` is -E2 R^6 from the dipole-dipole part alone, which does not
        depend on R.
    """
    R = np.array([0.0, 0.0, float(R)]) if np.ndim(R) == 0 else np.asarray(R, dtype=float)
    dist = float(np.linalg.norm(R))
    if check:
        check_separation([alpha, beta], model, R)
    terms = _terms(order, model, model)
    D = gradient_tensors(R)
    max_power = max(max(a, b) for a, b, _ in terms)
    ba = _channel_blocks(alpha, basis, model, max_power)
    bb = ba if beta is alpha else _channel_blocks(beta, basis, model, max_power)
    e0 = alpha.energy + beta.energy
    e1 = first_order_energy(alpha, beta, R, model, order) if check else float("nan")

    total = 0.0
    c6_sum = 0.0
    max_den = -np.inf
    channels = []
    per_block = {}
    for ka, (ea, ma) in ba.items():
        for kb, (eb, mb) in bb.items():
            G = np.zeros((ea.size, eb.size), dtype=complex)
            Gdd = None
            for a, b, coeff in terms:
                if not (ma[a].any() and mb[b].any()):
                    continue
                part = coeff * _contract(D[a + b], ma[a][:, None], mb[b][None, :], a, b)
                G += part
                if (a, b) == (1, 1):
                    Gdd = part
            if not G.any():
                continue
            w = np.abs(G) ** 2
            if pair_cutoff is not None:
                w[(ea[:, None] + eb[None, :]) > pair_cutoff] = 0.0
            skip = (_skip_index(alpha, ka, ea), _skip_index(beta, kb, eb))
            s, min_abs, mx = gap_weighted_sum(w, ea, eb, e0, skip)
            if min_abs < 1e-10:
                raise DegenerateDenominator(
                    f"channel in block {ka}x{kb} is degenerate with the unperturbed pair"
                )
            max_den = max(max_den, mx)
            total += s
            per_block[f"{ka[0]},{ka[1]};{kb[0]},{kb[1]}"] = s
            if Gdd is not None:
                wd = np.abs(Gdd) ** 2
                if pair_cutoff is not None:
                    wd[(ea[:, None] + eb[None, :]) > pair_cutoff] = 0.0
                c6_sum += gap_weighted_sum(wd, ea, eb, e0, skip)[0]
            den = e0 - ea[:, None] - eb[None, :]
            contrib = np.where(w > 0, w / np.where(w > 0, den, 1.0), 0.0)
            if skip[0] >= 0 and skip[1] >= 0:
                contrib[skip] = 0.0
            flat = np.argsort(np.abs(contrib), axis=None)[::-1][:n_channels]
            for f in flat:
                i, j = np.unravel_index(f, contrib.shape)
                if contrib[i, j] == 0:
                    break
                channels.append({
                    "a": {"l": ka[0], "m": ka[1], "index": int(i), "energy": float(ea[i])},
                    "b": {"l": kb[0], "m": kb[1], "index": int(j), "energy": float(eb[j])},
                    "contribution": float(contrib[i, j]),
                })
    channels.sort(key=lambda c: -abs(c["contribution"]))
    return VdwResult(
        R=dist, E0=e0, E1=e1, E2=float(total), C6=float(-c6_sum * dist**6), order=order,
        channel_contributions=channels[:n_channels], block_contributions=per_block,
        max_denominator=float(max_den),
    )


def c6_coefficient(alpha, basis, model=AtomModel(), pair_cutoff=None):
    """C6 of two identical atoms in state ``alpha`` (dipole-dipole, R-independent)."""
    return second_order_energy(alpha, alpha, 50.0, model, basis, order=1,
                               pair_cutoff=pair_cutoff, check=False).C6


# --------------------------------------------------------------------------
# effective potential


@dataclass(frozen=True)
class EffectivePotential:
    """V_eff(R) tabulated on a radial grid for a ground-state pair."""

    R: np.ndarray
    V: np.ndarray
    C6: float

    @property
    def R6V(self):
        return self.R**6 * self.V

    def plateau_spread(self, r_min=20.0):
        sel = self.R >= r_min
        vals = self.R6V[sel]
        return float((vals.max() - vals.min()) / abs(vals.mean()))

    def __call__(self, r):
        return np.interp(r, self.R, self.V)


def effective_potential(alpha, basis, model=AtomModel(), R_grid=None, order=1, direction=(0, 0, 1)):
    """V_eff(R) = sum |G|^2/(2 e_alpha - e_l - e_r) for two atoms in ``alpha``.

    For an isotropic ``alpha`` the result depends only on |R|.  The first-order
    (Born) term G_{aa;aa} vanishes, so this second-order sum is the leading
    atom-atom scattering potential.
    """
    R_grid = np.geomspace(10.0, 100.0, 25) if R_grid is None else np.asarray(R_grid, dtype=float)
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    V = np.array([
        second_order_energy(alpha, alpha, r * n, model, basis, order, check=False).E2
        for r in R_grid
    ])
    c6 = c6_coefficient(alpha, basis, model)
    return EffectivePotential(R_grid, V, c6)


def effective_matrix(states, model, R, reference, order=1):
    """Second-order effective interaction on a degenerate product subspace.

    Builds the full product-basis coupling matrix V and returns
    P V Q (E0 - H0)^{-1} Q V P restricted to the pairs in ``reference``
    (a list of (i, j) index pairs into ``states``), by dense linear algebra.
    """
    t = coupling_tensor(states, model, R, order, check=False)
    n = len(states)
    V = t.G.reshape(n * n, n * n).T  # rows final, columns initial
    e = np.array([s.energy for s in states])
    H0 = (e[:, None] + e[None, :]).ravel()
    P = np.array([i * n + j for i, j in reference])
    E0 = H0[P[0]]
    Q = np.setdiff1d(np.arange(n * n), P)
    res = np.diag(1.0 / (E0 - H0[Q]))
    return V[np.ix_(P, Q)] @ res @ V[np.ix_(Q, P)]
