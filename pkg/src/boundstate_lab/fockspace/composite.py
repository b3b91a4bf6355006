"""Composite operators built from pair wavefunctions, and Gram-matrix checks."""

from fractions import Fraction
from itertools import permutations

import numpy as np

from ..errors import OffGrid, SeparationViolated, ValidationError
from .lattice import OperatorMatrix, field_operator, minimal_image


def _anchor_site(space, X):
    L = space.nsites
    if isinstance(X, Fraction) or not float(X).is_integer():
        # a refined-grid centre of mass that is not a lattice site
        raise OffGrid(f"centre of mass {X} is not a lattice site")
    X = int(X)
    if not 0 <= X < L:
        raise OffGrid(f"centre of mass {X} outside [0, {L})")
    return X


def composite_operator(space, spectrum, alpha, X, dagger=False):
    """phi_alpha(X) = sum_y phi_alpha(y)* psi2(x2) psi1(x1), or its adjoint.

    The pair with relative displacement y belongs to the anchor X when X is
    the site nearest its centre of mass, so each (x1, x2) appears in exactly
    one composite operator.
    """
    X = _anchor_site(space, X)
    cfg = space.config
    phi = spectrum[alpha].phi
    total = None
    for y in range(space.nsites):
        if phi[y] == 0:
            continue
        x1, x2 = cfg.constituents(X, y)
        pair = field_operator(space, 1, x1, True) @ field_operator(space, 2, x2, True)
        term = pair * phi[y]
        total = term if total is None else total + term
    return total.H if not dagger else total


def _creation(space, spectrum, item):
    kind, pos, label = item
    if kind == "psi1":
        return field_operator(space, 1, pos, True)
    if kind == "psi2":
        return field_operator(space, 2, pos, True)
    if kind == "phi":
        return composite_operator(space, spectrum, label, pos, True)
    raise ValidationError(f"unknown placement kind {kind!r}")


def placement_state(space, spectrum, placements):
    """Product of creation operators (left to right) applied to the vacuum."""
    v = space.vacuum()
    for item in reversed(list(placements)):
        v = _creation(space, spectrum, item) @ v
    return v


def _fermion_sign(items):
    """Sign of the stable sort of ``items`` by kind, counting fermion swaps."""
    rank = {"psi1": 0, "psi2": 1, "phi": 2}
    seq = [rank[k] for k, _, _ in items]
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j] and seq[i] < 2 and seq[j] < 2:
                sign = -sign
    return sign


def _delta_block(a, b, fermion):
    if len(a) != len(b):
        return 0.0
    total = 0.0
    for perm in permutations(range(len(b))):
        if all(a[i] == b[p] for i, p in enumerate(perm)):
            if fermion:
                inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
                total += -1.0 if inv % 2 else 1.0
            else:
                total += 1.0
    return total


def ideal_overlap(ci, cj):
    """<ci|cj> for independent fermions and elementary composite bosons.

    Elementary fermions give a determinant of deltas, composites a permanent.
    """
    out = _fermion_sign(ci) * _fermion_sign(cj)
    for kind, fermion in (("psi1", True), ("psi2", True), ("phi", False)):
        a = [(p, l) for k, p, l in ci if k == kind]
        b = [(p, l) for k, p, l in cj if k == kind]
        out *= _delta_block(a, b, fermion)
        if out == 0:
            return 0.0
    return out


def min_separation(space, placements):
    pos = [p for _, p, _ in placements]
    best = np.inf
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            best = min(best, abs(int(minimal_image(pos[i] - pos[j], space.nsites))))
    return best


def verify_orthonormality(space, spectrum, placements, variants=None, force=False, bound_factor=10.0):
    """Gram matrix of separated mixed states against the ideal delta structure.

    Parameters
    ----------
    placements : list of (kind, position, label)
        ``kind`` is 'psi1', 'psi2' or 'phi'; ``label`` is ignored for fermions.
    variants : list of placement lists, optional
        Further configurations; the Gram matrix spans all of them.
    force : bool
        Evaluate even when two objects are closer than ``separation_a``.

    Returns
    -------
    dict
        max_deviation, bound = bound_factor * r0 / a, pass, gram, ideal.
    """
    configs = [list(placements)] + [list(v) for v in (variants or [])]
    a = space.config.separation_a
    closest = min(min_separation(space, c) for c in configs)
    if closest < a and not force:
        raise SeparationViolated(f"objects {closest} sites apart, below separation_a = {a}")
    vecs = np.array([placement_state(space, spectrum, c) for c in configs])
    gram = vecs.conj() @ vecs.T
    ideal = np.array([[ideal_overlap(ci, cj) for cj in configs] for ci in configs])
    dev = float(np.max(np.abs(gram - ideal)))
    bound = bound_factor * spectrum.r0 / a
    return {
        "check_name": "gram_matrix",
        "max_deviation": dev,
        "bound": bound,
        "pass": dev < bound,
        "min_separation": float(closest),
        "gram": gram,
        "ideal": ideal,
    }
