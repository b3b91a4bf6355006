"""Exact lattice matrix elements against the effective Hamiltonian.

Only interaction parts are compared.  The internal binding of each
composite, <beta| v12 |alpha>, is removed from the exact element; what is
left is the interaction between separated objects, which the effective
theory writes as a kernel between independent chi and eta excitations.
The residual difference comes from configurations in which a constituent
would sit on top of the other object (Pauli exclusion and exchange), and
falls with the wavefunction tail at distance ~a.
"""

import numpy as np

from ..errors import SeparationViolated, ValidationError
from .auxiliary import (
    AuxiliarySpace,
    composite_composite_kernel,
    effective_hamiltonian,
    fermion_composite_kernel,
)
from .composite import placement_state
from .lattice import enumerate_basis, exact_hamiltonian, minimal_image, potential_operator


def internal_binding(spectrum, config, beta, alpha):
    """<beta| v12 |alpha> over the relative coordinate."""
    return complex(np.vdot(spectrum[beta].phi, config.potential.v12 * spectrum[alpha].phi))


def _distance(L, a, b):
    return abs(int(minimal_image(a - b, L)))


def _report(name, exact, effective, bound, extra=None):
    exact = np.asarray(exact, dtype=complex)
    effective = np.asarray(effective, dtype=complex)
    dev = float(np.max(np.abs(exact - effective))) if exact.size else 0.0
    scale = float(np.max(np.abs(exact))) if exact.size else 0.0
    out = {
        "check_name": name,
        "max_deviation": dev,
        "relative_deviation": dev / scale if scale > 0 else dev,
        "bound": bound,
        "pass": dev <= bound,
    }
    out.update(extra or {})
    return out


def effective_vs_exact(space, spectrum, sector, labels=None, tol=1e-10, aux=None):
    """Compare exact and effective matrix elements in one particle sector.

    Parameters
    ----------
    space : LatticeFockSpace
        Exact space; it must hold the particles of the sector.
    spectrum : PairSpectrum
    sector : dict
        ``kind`` is one of

        * 'composite': one composite at zero total momentum; the exact energy
          and the effective energy are both compared to eps_alpha.
        * 'fermion1' / 'fermion2': an elementary particle at ``x`` and a
          composite at ``X``.  ``x`` may be a list of positions.
        * 'composite_pair': composites at ``X`` and ``Z``.
        * 'decay': <chi_1^dag chi_2^dag| H_eff |eta^dag>, which must vanish.
    labels : sequence, optional
        Bound-state labels to include (default: every bound state).
    tol : float
        Pass bound on the absolute deviation.

    Returns
    -------
    dict
        check_name, max_deviation, relative_deviation, bound, pass.
    """
    cfg = space.config
    L = cfg.sites
    labels = tuple(s.label for s in spectrum.bound) if labels is None else tuple(labels)
    kind = sector["kind"]
    a = cfg.separation_a

    if kind == "composite":
        H = exact_hamiltonian(space)
        exact, eff = [], []
        aux = aux or AuxiliarySpace(cfg, spectrum, labels, 0, 0, 1)
        heff = effective_hamiltonian(aux).total
        for lab in labels:
            v = sum(placement_state(space, spectrum, [("phi", X, lab)]) for X in range(L)) / np.sqrt(L)
            exact.append(np.vdot(v, H @ v))
            w = sum(aux.eta_c(lab, X, True) @ aux.vacuum() for X in range(L)) / np.sqrt(L)
            eff.append(np.vdot(w, heff @ w))
        eps = [spectrum[lab].energy for lab in labels]
        rep = _report("single_composite_energy", exact, eps, tol)
        rep["effective_deviation"] = float(np.max(np.abs(np.array(eff) - eps)))
        rep["pass"] = rep["pass"] and rep["effective_deviation"] <= tol
        return rep

    if kind == "decay":
        aux = aux or AuxiliarySpace(cfg, spectrum, labels, 1, 1, 1)
        H = effective_hamiltonian(aux).total
        vals = []
        for lab in labels:
            for X in range(L):
                ket = aux.eta_c(lab, X, True) @ aux.vacuum()
                out = H @ ket
                for x1 in range(L):
                    for x2 in range(L):
                        bra = aux.chi_c(1, x1, True) @ (aux.chi_c(2, x2, True) @ aux.vacuum())
                        vals.append(np.vdot(bra, out))
        return _report("decay_matrix_elements", vals, np.zeros(len(vals)), 0.0)

    V = potential_operator(space)
    if kind in ("fermion1", "fermion2"):
        species = 1 if kind == "fermion1" else 2
        X = int(sector.get("X", 0))
        xs = sector.get("x")
        xs = [x for x in range(L) if _distance(L, x, X) >= a] if xs is None else np.atleast_1d(xs).tolist()
        if not xs:
            raise ValidationError("no elementary position at distance >= separation_a")
        if min(_distance(L, x, X) for x in xs) < a and not sector.get("force", False):
            raise SeparationViolated("elementary particle closer than separation_a to the composite")
        if aux is None:
            aux = AuxiliarySpace(cfg, spectrum, labels, 1 if species == 1 else 0, 1 if species == 2 else 0, 1)
        hint = effective_hamiltonian(aux)
        H1 = hint.fermion1_composite if species == 1 else hint.fermion2_composite
        kname = "psi1" if species == 1 else "psi2"
        exact, eff, kern = [], [], []
        for x in xs:
            kets = {lab: placement_state(space, spectrum, [(kname, x, None), ("phi", X, lab)]) for lab in labels}
            akets = {lab: aux.chi_c(species, x, True) @ (aux.eta_c(lab, X, True) @ aux.vacuum()) for lab in labels}
            for beta in labels:
                for alpha in labels:
                    e = np.vdot(kets[beta], V @ kets[alpha]) - internal_binding(spectrum, cfg, beta, alpha)
                    exact.append(e)
                    eff.append(np.vdot(akets[beta], H1 @ akets[alpha]))
                    kern.append(fermion_composite_kernel(cfg, spectrum, species, beta, alpha, x, X))
        rep = _report(f"{kind}_composite_interaction", exact, eff, tol)
        rep["kernel_vs_operator"] = float(np.max(np.abs(np.array(eff) - np.array(kern))))
        return rep

    if kind == "composite_pair":
        X, Z = int(sector["X"]), int(sector["Z"])
        if _distance(L, X, Z) < a and not sector.get("force", False):
            raise SeparationViolated("composites closer than separation_a")
        aux = aux or AuxiliarySpace(cfg, spectrum, labels, 0, 0, 2)
        Hcc = effective_hamiltonian(aux).composite_composite
        exact, eff = [], []
        pairs = [(b, d) for b in labels for d in labels]
        kets = {(p, q): placement_state(space, spectrum, [("phi", X, p), ("phi", Z, q)]) for p, q in pairs}
        akets = {(p, q): aux.eta_c(p, X, True) @ (aux.eta_c(q, Z, True) @ aux.vacuum()) for p, q in pairs}
        for beta, delta in pairs:
            for alpha, gamma in pairs:
                e = np.vdot(kets[beta, delta], V @ kets[alpha, gamma])
                e -= internal_binding(spectrum, cfg, beta, alpha) * (delta == gamma)
                e -= internal_binding(spectrum, cfg, delta, gamma) * (beta == alpha)
                exact.append(e)
                eff.append(np.vdot(akets[beta, delta], Hcc @ akets[alpha, gamma]))
        rep = _report("composite_pair_interaction", exact, eff, tol)
        k = composite_composite_kernel(cfg, spectrum, labels[0], labels[0], labels[0], labels[0], X, Z)
        rep["ground_kernel"] = float(k.real)
        return rep

    raise ValidationError(f"unknown sector kind {kind!r}")


def exact_space_for(config, kind, cap=None):
    """Smallest exact space that holds a sector of the given kind."""
    need = {"composite": (1, 1), "fermion1": (2, 1), "fermion2": (1, 2),
            "composite_pair": (2, 2), "decay": (1, 1)}[kind]
    kwargs = {} if cap is None else {"cap": cap}
    return enumerate_basis(config, *need, **kwargs)
