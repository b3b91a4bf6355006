"""Auxiliary space: independent fermions chi_1, chi_2 and composite bosons eta_alpha.

The boson sector is truncated by the total boson number.  Truncated
annihilators (and creators) still commute among themselves exactly, so the
anticommutation identities of the tilde fields survive the truncation.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, combinations_with_replacement
import math

import numpy as np
import scipy.sparse as sp

from .._backend import density_energy
from ..errors import IncompatibleBoost, ValidationError
from .lattice import OperatorMatrix, anticommutator, commutator


def _boson_patterns(nmodes, nmax):
    out = []
    for k in range(nmax + 1):
        for combo in combinations_with_replacement(range(nmodes), k):
            occ = [0] * nmodes
            for c in combo:
                occ[c] += 1
            out.append(tuple(occ))
    return out


def _fermion_patterns(L, n1, n2):
    p1 = [sum(1 << s for s in occ) for k in range(n1 + 1) for occ in combinations(range(L), k)]
    p2 = [sum(1 << (s + L) for s in occ) for k in range(n2 + 1) for occ in combinations(range(L), k)]
    return sorted(a | b for a in p1 for b in p2)


@dataclass(eq=False)
class AuxiliarySpace:
    """Product of a fermion Fock space and a truncated boson Fock space.

    Boson mode ``j * L + X`` is eta for the j-th entry of ``labels`` at anchor X.
    """

    config: object
    spectrum: object
    labels: tuple
    max_n1: int = 1
    max_n2: int = 1
    max_bosons: int = 1
    fermions: np.ndarray = field(init=False, repr=False)
    bosons: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        L = self.config.sites
        self.labels = tuple(self.labels)
        fp = _fermion_patterns(L, self.max_n1, self.max_n2)
        bp = _boson_patterns(len(self.labels) * L, self.max_bosons)
        self.fermions = np.array([f for b in bp for f in fp], dtype=np.int64)
        self.bosons = np.array([b for b in bp for _ in fp], dtype=np.int64).reshape(len(fp) * len(bp), -1)
        self._index = {(int(f), tuple(b)): i for i, (f, b) in enumerate(zip(self.fermions, self.bosons.tolist()))}

    @property
    def dim(self):
        return self.fermions.size

    @property
    def nsites(self):
        return self.config.sites

    def boson_mode(self, label, X):
        return self.labels.index(label) * self.nsites + X % self.nsites

    def lookup(self, fbits, bocc):
        return self._index.get((int(fbits), tuple(bocc)))

    def vacuum(self):
        v = np.zeros(self.dim, dtype=complex)
        v[self.lookup(0, (0,) * self.bosons.shape[1])] = 1.0
        return v

    def _matrix(self, rows, cols, vals):
        m = sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(self.dim, self.dim))
        return OperatorMatrix(self, m)

    def diagonal(self, values):
        return OperatorMatrix(self, sp.diags(np.asarray(values, dtype=complex), format="csr"))

    # -- elementary operators -------------------------------------------------

    def chi(self, species, site, dagger=False):
        mode = site + (species - 1) * self.nsites
        bit = 1 << mode
        rows, cols, vals = [], [], []
        for j, (f, b) in enumerate(zip(self.fermions.tolist(), self.bosons.tolist())):
            if bool(f & bit) == dagger:
                continue
            i = self.lookup(f ^ bit, b)
            if i is None:
                continue
            rows.append(i)
            cols.append(j)
            vals.append(-1.0 if bin(f & (bit - 1)).count("1") % 2 else 1.0)
        return self._matrix(rows, cols, vals)

    def eta(self, label, X, dagger=False):
        mode = self.boson_mode(label, X)
        rows, cols, vals = [], [], []
        for j, (f, b) in enumerate(zip(self.fermions.tolist(), self.bosons.tolist())):
            n = b[mode]
            if not dagger and n == 0:
                continue
            new = list(b)
            new[mode] += 1 if dagger else -1
            i = self.lookup(f, new)
            if i is None:
                continue
            rows.append(i)
            cols.append(j)
            vals.append(math.sqrt(n + 1) if dagger else math.sqrt(n))
        return self._matrix(rows, cols, vals)

    @cached_property
    def _chi_cache(self):
        return {}

    def chi_c(self, species, site, dagger=False):
        key = (species, site % self.nsites, dagger)
        if key not in self._chi_cache:
            self._chi_cache[key] = self.chi(species, site % self.nsites, dagger)
        return self._chi_cache[key]

    @cached_property
    def _eta_cache(self):
        return {}

    def eta_c(self, label, X, dagger=False):
        key = (label, X % self.nsites, dagger)
        if key not in self._eta_cache:
            self._eta_cache[key] = self.eta(label, X % self.nsites, dagger)
        return self._eta_cache[key]

    # -- densities -------------------------------------------------------------

    def fermion_density(self, species):
        """n_i(x) for every site, shape (dim, L)."""
        shift = (species - 1) * self.nsites
        return (self.fermions[:, None] >> (np.arange(self.nsites) + shift)) & 1

    def boson_density(self, label):
        j = self.labels.index(label)
        return self.bosons[:, j * self.nsites:(j + 1) * self.nsites]

    def number(self, species):
        """N_i = chi_i^dag chi_i summed, plus one per composite."""
        return self.diagonal(self.fermion_density(species).sum(1) + self.bosons.sum(1))

    def interior(self):
        """States on which fermion truncation cannot spoil the algebra."""
        return (self.fermion_density(1).sum(1) < self.max_n1) & (self.fermion_density(2).sum(1) < self.max_n2)

    def pair_field(self, x1, x2):
        """Two-point composite annihilator sum_alpha phi_alpha(x1 - x2) eta_alpha(X)."""
        cfg = self.config
        X = cfg.anchor(x1, x2)
        y = (x1 - x2) % self.nsites
        total = None
        for lab in self.labels:
            term = self.eta_c(lab, X) * self.spectrum[lab].phi[y]
            total = term if total is None else total + term
        return total


# --------------------------------------------------------------------------
# effective Hamiltonian


def fermion_composite_kernel(config, spectrum, species, beta, alpha, x, X):
    """Interaction of an elementary particle at x with composite alpha -> beta at X."""
    pot, L = config.potential, config.sites
    pb, pa = spectrum[beta].phi, spectrum[alpha].phi
    total = 0.0
    for y in range(L):
        w = np.conj(pb[y]) * pa[y]
        if w == 0:
            continue
        x1, x2 = config.constituents(X, y)
        if species == 1:
            total += w * (pot.v11[(x - x1) % L] + pot.v12[(x - x2) % L])
        else:
            total += w * (pot.v12[(x1 - x) % L] + pot.v22[(x - x2) % L])
    return complex(total)


def composite_composite_kernel(config, spectrum, beta, delta, alpha, gamma, X, Z):
    """<beta X, delta Z| interaction between the two composites |alpha X, gamma Z>."""
    pot, L = config.potential, config.sites
    pb, pd = spectrum[beta].phi, spectrum[delta].phi
    pa, pg = spectrum[alpha].phi, spectrum[gamma].phi
    total = 0.0
    for y in range(L):
        wa = np.conj(pb[y]) * pa[y]
        if wa == 0:
            continue
        x1, x2 = config.constituents(X, y)
        for yp in range(L):
            wb = np.conj(pd[yp]) * pg[yp]
            if wb == 0:
                continue
            z1, z2 = config.constituents(Z, yp)
            v = (pot.v11[(x1 - z1) % L] + pot.v22[(x2 - z2) % L]
                 + pot.v12[(x1 - z2) % L] + pot.v12[(z1 - x2) % L])
            total += wa * wb * v
    return complex(total)


def free_hamiltonian(aux):
    """Kinetic terms of chi_1, chi_2, eta plus the internal energies."""
    cfg, L = aux.config, aux.nsites
    total = None
    hops = [(1, 1.0 / (2 * cfg.mass1)), (2, 1.0 / (2 * cfg.mass2))]
    for species, t in hops:
        for x in range(L):
            hop = aux.chi_c(species, x, True) @ aux.chi_c(species, x + 1)
            term = (hop + hop.H) * (-t) + (aux.chi_c(species, x, True) @ aux.chi_c(species, x)) * (2 * t)
            total = term if total is None else total + term
    tM = 1.0 / (2 * cfg.M)
    for lab in aux.labels:
        eps = aux.spectrum[lab].energy
        for X in range(L):
            hop = aux.eta_c(lab, X, True) @ aux.eta_c(lab, X + 1)
            total = total + (hop + hop.H) * (-tM)
            total = total + (aux.eta_c(lab, X, True) @ aux.eta_c(lab, X)) * (2 * tM + eps)
    return total


def elementary_interaction(aux):
    """Density-density interaction among the chi fermions."""
    pot = aux.config.potential
    return aux.diagonal(density_energy(aux.fermions, aux.nsites, pot.v11, pot.v22, pot.v12))


def _constituent_tables(config):
    L = config.sites
    c1 = np.empty((L, L), dtype=int)
    c2 = np.empty((L, L), dtype=int)
    for X in range(L):
        for y in range(L):
            c1[X, y], c2[X, y] = config.constituents(X, y)
    return c1, c2


def fermion_composite_kernels(config, spectrum, labels, species):
    """K[b, a, x, X] for all label pairs and positions (vectorized kernel)."""
    pot, L = config.potential, config.sites
    c1, c2 = _constituent_tables(config)
    x = np.arange(L)[:, None, None]
    if species == 1:
        W = pot.v11[(x - c1[None]) % L] + pot.v12[(x - c2[None]) % L]
    else:
        W = pot.v12[(c1[None] - x) % L] + pot.v22[(x - c2[None]) % L]
    phi = np.array([spectrum[lab].phi for lab in labels])
    w = np.einsum("by,ay->bay", phi.conj(), phi)
    return np.einsum("bay,xXy->baxX", w, W)


def composite_composite_kernels(config, spectrum, labels):
    """K[b, d, a, g, X, Z] for all labels and anchor pairs."""
    pot, L = config.potential, config.sites
    c1, c2 = _constituent_tables(config)
    x1, x2 = c1[:, :, None, None], c2[:, :, None, None]
    z1, z2 = c1[None, None], c2[None, None]
    V = (pot.v11[(x1 - z1) % L] + pot.v22[(x2 - z2) % L]
         + pot.v12[(x1 - z2) % L] + pot.v12[(z1 - x2) % L])  # [X, y, Z, y']
    phi = np.array([spectrum[lab].phi for lab in labels])
    w = np.einsum("by,ay->bay", phi.conj(), phi)
    return np.einsum("bay,dgv,XyZv->bdagXZ", w, w, V, optimize=True)


def fermion_composite_interaction(aux, species):
    """sum K(x, X) chi^dag(x) chi(x) eta_beta^dag(X) eta_alpha(X)."""
    L, nl = aux.nsites, len(aux.labels)
    K = fermion_composite_kernels(aux.config, aux.spectrum, aux.labels, species)
    dens = aux.fermion_density(species)
    rows, cols, vals = [], [], []
    for j, (f, b) in enumerate(zip(aux.fermions.tolist(), aux.bosons.tolist())):
        xs = np.nonzero(dens[j])[0]
        if xs.size == 0:
            continue
        for mode, n in enumerate(b):
            if n == 0:
                continue
            a, X = divmod(mode, L)
            for bl in range(nl):
                new = list(b)
                new[mode] -= 1
                target = bl * L + X
                amp = math.sqrt(n) * math.sqrt(new[target] + 1)
                new[target] += 1
                k = K[bl, a, xs, X].sum()
                if k == 0:
                    continue
                rows.append(aux.lookup(f, new))
                cols.append(j)
                vals.append(amp * k)
    return aux._matrix(rows, cols, vals)


def composite_interaction(aux):
    """(1/2) sum K eta_beta^dag(X) eta_delta^dag(Z) eta_gamma(Z) eta_alpha(X)."""
    L, nl = aux.nsites, len(aux.labels)
    if aux.max_bosons < 2:
        return aux._matrix([], [], [])
    K = composite_composite_kernels(aux.config, aux.spectrum, aux.labels)
    rows, cols, vals = [], [], []
    for j, (f, b) in enumerate(zip(aux.fermions.tolist(), aux.bosons.tolist())):
        occ = [m for m, n in enumerate(b) if n]
        for m1 in occ:
            for m2 in occ:
                # eta_{m2} eta_{m1} on the state
                mid = list(b)
                amp = math.sqrt(mid[m1])
                mid[m1] -= 1
                if mid[m2] == 0:
                    continue
                amp *= math.sqrt(mid[m2])
                mid[m2] -= 1
                a, X = divmod(m1, L)
                g, Z = divmod(m2, L)
                for bl in range(nl):
                    for dl in range(nl):
                        k = K[bl, dl, a, g, X, Z]
                        if k == 0:
                            continue
                        new = list(mid)
                        t2 = dl * L + Z
                        c = math.sqrt(new[t2] + 1)
                        new[t2] += 1
                        t1 = bl * L + X
                        c *= math.sqrt(new[t1] + 1)
                        new[t1] += 1
                        rows.append(aux.lookup(f, new))
                        cols.append(j)
                        vals.append(0.5 * amp * c * k)
    return aux._matrix(rows, cols, vals)


class EffectiveHamiltonian:
    """Free part plus the four interaction families, built on first use."""

    def __init__(self, aux):
        self.aux = aux

    @cached_property
    def free(self):
        return free_hamiltonian(self.aux)

    @cached_property
    def elementary(self):
        return elementary_interaction(self.aux)

    @cached_property
    def fermion1_composite(self):
        return fermion_composite_interaction(self.aux, 1)

    @cached_property
    def fermion2_composite(self):
        return fermion_composite_interaction(self.aux, 2)

    @cached_property
    def composite_composite(self):
        return composite_interaction(self.aux)

    @cached_property
    def interaction(self):
        return self.elementary + self.fermion1_composite + self.fermion2_composite + self.composite_composite

    @cached_property
    def total(self):
        return self.free + self.interaction


def effective_hamiltonian(aux):
    return EffectiveHamiltonian(aux)


# --------------------------------------------------------------------------
# tilde fields


def tilde_field(aux, species, v):
    """psi~_1(v) = chi_1(v) + sum_y phi(v, y) chi_2^dag(y);
    psi~_2(v) = chi_2(v) - sum_y chi_1^dag(y) phi(y, v).

    The relative minus sign on the species-2 correction is what makes the
    pair of fields anticommute.
    """
    L = aux.nsites
    out = aux.chi_c(species, v)
    for y in range(L):
        if species == 1:
            out = out + aux.pair_field(v, y) @ aux.chi_c(2, y, True)
        else:
            out = out - aux.chi_c(1, y, True) @ aux.pair_field(y, v)
    return out


def tilde_anticommutators(aux, sites=None):
    """Largest entry of {psi~_i(x), psi~_j(x')} over all species and site pairs.

    Columns are restricted to states below both fermion caps, where the
    truncated chi operators still obey {chi, chi^dag} = 1.
    """
    sites = range(aux.nsites) if sites is None else sites
    cols = np.nonzero(aux.interior())[0]
    fields = {(s, x): tilde_field(aux, s, x) for s in (1, 2) for x in sites}
    worst = 0.0
    keys = list(fields)
    for i, a in enumerate(keys):
        for b in keys[i:]:
            ac = anticommutator(fields[a], fields[b]).entries[:, cols]
            if ac.nnz:
                worst = max(worst, float(np.abs(ac.data).max()))
    return worst


# --------------------------------------------------------------------------
# symmetries


def boost_phases(aux, v):
    """Diagonal of U_v = exp(-i v sum (m1 x n1 + m2 x n2 + M X n_eta))."""
    cfg, L = aux.config, aux.nsites
    x = np.arange(L)
    weight = cfg.mass1 * aux.fermion_density(1) @ x + cfg.mass2 * aux.fermion_density(2) @ x
    for lab in aux.labels:
        weight = weight + cfg.M * aux.boson_density(lab) @ x
    return np.exp(-1j * v * weight)


def admissible_velocity(config, v, tol=1e-9):
    L = config.sites
    for m in (config.mass1, config.mass2, config.M):
        q = m * v * L / (2 * np.pi)
        if abs(q - round(q)) > tol:
            return False
    return True


def galilean_boost_check(aux, v, tol=1e-10):
    """Verify U chi_i(x) U^dag = e^{i m_i v x} chi_i(x) and U eta(X) U^dag = e^{i M v X} eta(X).

    Raises
    ------
    IncompatibleBoost
        Unless m1 v, m2 v and M v are multiples of 2 pi / L.
    """
    cfg, L = aux.config, aux.nsites
    if not admissible_velocity(cfg, v):
        raise IncompatibleBoost(f"v = {v} is not compatible with the ring of {L} sites")
    U = aux.diagonal(boost_phases(aux, v))
    Ud = U.H
    checks = {}
    worst = 0.0
    for species, m in ((1, cfg.mass1), (2, cfg.mass2)):
        for x in range(L):
            op = aux.chi_c(species, x)
            dev = (U @ op @ Ud - op * np.exp(1j * m * v * x)).norm()
            worst = max(worst, dev)
    checks["chi"] = worst
    worst = 0.0
    for lab in aux.labels:
        for X in range(L):
            op = aux.eta_c(lab, X)
            dev = (U @ op @ Ud - op * np.exp(1j * cfg.M * v * X)).norm()
            worst = max(worst, dev)
    checks["eta"] = worst
    dens = None
    for lab in aux.labels:
        for X in range(L):
            d = aux.eta_c(lab, X, True) @ aux.eta_c(lab, X)
            dens = d if dens is None else dens + d
    checks["eta_density"] = commutator(U, dens).norm() if dens is not None else 0.0
    heff = effective_hamiltonian(aux)
    checks["interaction"] = commutator(U, heff.interaction).norm()
    dev = max(checks.values())
    return {"check_name": "galilean_boost", "velocity": v, "max_deviation": dev,
            "bound": tol, "pass": dev < tol, "components": checks}


def translation_operator(aux, shift=1):
    """Permutation shifting every chi and eta by ``shift`` sites, with fermion signs."""
    L = aux.nsites
    rows, cols, vals = [], [], []
    mask = (1 << L) - 1
    for j, (f, b) in enumerate(zip(aux.fermions.tolist(), aux.bosons.tolist())):
        sign = 1.0
        newf = 0
        for s in range(2):
            block = (f >> (s * L)) & mask
            for _ in range(shift % L):
                top = (block >> (L - 1)) & 1
                n = bin(block).count("1")
                if top and (n - 1) % 2:
                    sign = -sign
                block = ((block << 1) & mask) | top
            newf |= block << (s * L)
        nb = len(aux.labels)
        newb = []
        for k in range(nb):
            seg = b[k * L:(k + 1) * L]
            newb.extend(seg[-shift % L:] + seg[:-shift % L] if shift % L else seg)
        i = aux.lookup(newf, newb)
        rows.append(i)
        cols.append(j)
        vals.append(sign)
    return aux._matrix(rows, cols, vals)


def lattice_momentum(aux):
    """Sum over x of the discretized momentum density, for chi_1, chi_2 and eta."""
    L = aux.nsites
    total = None
    ops = [(lambda x, d=False, s=s: aux.chi_c(s, x, d)) for s in (1, 2)]
    ops += [(lambda x, d=False, lab=lab: aux.eta_c(lab, x, d)) for lab in aux.labels]
    for a in ops:
        for x in range(L):
            hop = a(x, True) @ a(x + 1)
            term = (hop - hop.H) * (1 / 2j)
            total = term if total is None else total + term
    return total


def momentum_mode_sum(aux):
    """sum_k sin(k) a_k^dag a_k built from plane-wave modes, for comparison."""
    L = aux.nsites
    total = None
    ks = 2 * np.pi * np.arange(L) / L
    ops = [(lambda x, d=False, s=s: aux.chi_c(s, x, d)) for s in (1, 2)]
    ops += [(lambda x, d=False, lab=lab: aux.eta_c(lab, x, d)) for lab in aux.labels]
    for a in ops:
        for k in ks:
            ak = None
            for x in range(L):
                t = a(x) * (np.exp(-1j * k * x) / math.sqrt(L))
                ak = t if ak is None else ak + t
            term = (ak.H @ ak) * math.sin(k)
            total = term if total is None else total + term
    return total
