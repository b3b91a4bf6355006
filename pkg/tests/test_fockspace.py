import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boundstate_lab.errors import (
    CapExceeded,
    IncompatibleBoost,
    NoBoundState,
    OffGrid,
    SeparationViolated,
    ValidationError,
)
from boundstate_lab.fockspace import (
    AuxiliarySpace,
    LatticeConfig,
    PairPotential,
    anticommutator,
    basis_size,
    commutator,
    composite_operator,
    effective_hamiltonian,
    effective_vs_exact,
    enumerate_basis,
    exact_space_for,
    field_operator,
    galilean_boost_check,
    identity,
    lattice_momentum,
    momentum_mode_sum,
    placement_state,
    solve_pair_problem,
    tilde_anticommutators,
    tilde_field,
    translation_operator,
    verify_orthonormality,
)

from conftest import make_lattice


def _cfg(L, depth=8.0, a=3):
    return LatticeConfig(L, PairPotential.square_well(L, depth, 1, repulsion=1.0), separation_a=a)


@pytest.mark.parametrize("L, n1, n2, size", [(2, 1, 0, 3), (4, 1, 1, 25), (6, 2, 2, 484)])
def test_basis_sizes(L, n1, n2, size):
    space = enumerate_basis(_cfg(L, a=1), n1, n2)
    assert space.dim == size == basis_size(L, n1, n2)
    assert sorted(space.index(p) for p in space.basis) == list(range(size))


def test_cap_exceeded():
    with pytest.raises(CapExceeded):
        enumerate_basis(_cfg(12), 6, 6, cap=1000)


def test_config_validation():
    with pytest.raises(ValidationError):
        _cfg(7)


def test_refined_center_grid():
    cfg = _cfg(8)
    for x1 in range(8):
        for x2 in range(8):
            XM = cfg.refined_center(x1, x2) * cfg.M
            assert abs(XM - round(XM)) < 1e-12


def test_field_operator_algebra():
    space = enumerate_basis(_cfg(4), 2, 2)
    one = identity(space)
    vac = space.vacuum()
    ops = {(s, x): field_operator(space, s, x) for s in (1, 2) for x in range(4)}
    for (s, x), a in ops.items():
        assert np.abs(a @ vac).max() == 0
        assert (field_operator(space, s, x, True) - a.H).norm() == 0
        for (t, y), b in ops.items():
            # truncation only matters for states at the particle cap; check on the interior
            ac = anticommutator(a, b.H)
            expected = one * float(s == t and x == y)
            diff = (ac - expected).toarray()[:, space.interior()]
            assert np.abs(diff).max() < 1e-15
            assert anticommutator(a, b).norm() < 1e-15


def test_pair_problem():
    cfg, sp = make_lattice(12, 8.0, 4)
    assert np.max(np.abs(sp.gram() - np.eye(12))) < 1e-12
    assert np.all(np.diff(sp.energies) >= 0)
    assert all(s.energy < 0 for s in sp.bound)
    cfg_flat = LatticeConfig(8, PairPotential(np.zeros(8), np.zeros(8), np.zeros(8)))
    with pytest.raises(NoBoundState):
        solve_pair_problem(cfg_flat)


def test_strong_binding_limit():
    U = 400.0
    cfg = LatticeConfig(8, PairPotential.square_well(8, U, 0))
    e0 = solve_pair_problem(cfg).energies[0]
    # on-site well: e0 = -U + 2t - 2 t^2 / U + ... with hopping t = 1/(2 mu)
    t = 1 / (2 * cfg.mu)
    assert e0 == pytest.approx(-U + 2 * t - 2 * t**2 / U, rel=1e-7)


def test_composite_vacuum_structure(ring8):
    cfg, sp = ring8
    space = enumerate_basis(cfg, 1, 1)
    vac = space.vacuum()
    labels = [s.label for s in sp.bound]
    for a in labels:
        for X in range(cfg.sites):
            A = composite_operator(space, sp, a, X)
            assert np.abs(A @ vac).max() == 0
            for b in labels:
                for Xp in range(cfg.sites):
                    B = composite_operator(space, sp, b, Xp, True)
                    amp = np.vdot(vac, A @ (B @ vac))
                    assert abs(amp - (a == b and X == Xp)) < 1e-12


def test_off_grid(ring8):
    cfg, sp = ring8
    space = enumerate_basis(cfg, 1, 1)
    with pytest.raises(OffGrid):
        composite_operator(space, sp, 0, 2.5)
    with pytest.raises(OffGrid):
        composite_operator(space, sp, 0, 99)


def test_orthonormality_and_separation():
    cfg, sp = make_lattice(12, 16.0, 4)
    space = enumerate_basis(cfg, 2, 2)
    rep = verify_orthonormality(space, sp, [("psi1", 0, None), ("phi", 4, 0)])
    assert rep["pass"] and rep["max_deviation"] < 1e-12
    assert verify_orthonormality(space, sp, [])["max_deviation"] == 0.0
    with pytest.raises(SeparationViolated):
        verify_orthonormality(space, sp, [("phi", 0, 0), ("phi", 0, 0)])
    v = placement_state(space, sp, [("phi", 0, 0), ("phi", 0, 0)])
    assert abs(np.vdot(v, v) - 2.0) > 1e-3


def test_gram_deviation_falls_with_depth():
    devs = []
    for U in (4.0, 8.0, 16.0):
        cfg, sp = make_lattice(12, U, 4)
        space = enumerate_basis(cfg, 2, 2)
        rep = verify_orthonormality(space, sp, [("psi1", 0, None), ("phi", 4, 0)])
        assert rep["max_deviation"] < rep["bound"]
        devs.append(rep["max_deviation"])
    assert devs[0] > devs[1] > devs[2]


@pytest.mark.parametrize("kind, extra", [
    ("composite", {}), ("fermion1", {"X": 0}), ("fermion2", {"X": 0}),
    ("composite_pair", {"X": 0, "Z": 6}), ("decay", {}),
])
def test_effective_vs_exact(kind, extra):
    cfg, sp = make_lattice(12, 8.0, 4)
    rep = effective_vs_exact(exact_space_for(cfg, kind), sp, {"kind": kind, **extra})
    assert rep["max_deviation"] <= 1e-10
    if kind == "decay":
        assert rep["max_deviation"] == 0.0


def test_effective_vs_exact_requires_separation():
    cfg, sp = make_lattice(12, 8.0, 4)
    with pytest.raises(SeparationViolated):
        effective_vs_exact(exact_space_for(cfg, "composite_pair"), sp, {"kind": "composite_pair", "X": 0, "Z": 2})


@pytest.fixture(scope="module")
def aux8(ring8):
    cfg, sp = ring8
    return AuxiliarySpace(cfg, sp, tuple(s.label for s in sp.bound), 1, 1, 1)


def test_tilde_anticommutators(aux8):
    assert tilde_anticommutators(aux8) < 1e-12


def test_tilde_reproduces_exact_amplitude(ring8, aux8):
    cfg, sp = ring8
    space = enumerate_basis(cfg, 1, 1)
    X = cfg.anchor(2, 1)
    vac = space.vacuum()
    exact = np.vdot(vac, field_operator(space, 2, 1) @ (field_operator(space, 1, 2)
                                                         @ (composite_operator(space, sp, 0, X, True) @ vac)))
    a = aux8
    t = tilde_field(a, 2, 1) @ (tilde_field(a, 1, 2) @ (a.eta_c(0, X, True) @ a.vacuum()))
    assert np.vdot(a.vacuum(), t) == pytest.approx(exact, abs=1e-14)


def test_number_conservation(aux8):
    H = effective_hamiltonian(aux8).total
    assert commutator(aux8.number(1), H).norm() < 1e-12
    assert commutator(aux8.number(2), H).norm() < 1e-12


def test_translation_and_momentum(aux8):
    H = effective_hamiltonian(aux8)
    T = translation_operator(aux8)
    assert commutator(T, H.total).norm() < 1e-12
    P = lattice_momentum(aux8)
    assert (P - momentum_mode_sum(aux8)).norm() < 1e-12
    assert commutator(P, H.free).norm() < 1e-12


@pytest.mark.parametrize("k", [0, 1, 2])
def test_galilean_boost(aux8, k):
    v = 2 * np.pi * k / aux8.nsites
    rep = galilean_boost_check(aux8, v)
    assert rep["pass"]
    assert rep["components"]["eta_density"] < 1e-12


def test_incompatible_boost(aux8):
    with pytest.raises(IncompatibleBoost):
        galilean_boost_check(aux8, 0.3)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5), st.integers(1, 2), st.integers(1, 2))
def test_distinct_modes_anticommute(x, y, s, t):
    space = enumerate_basis(_cfg(6), 2, 2)
    a = field_operator(space, s, x)
    b = field_operator(space, t, y, True)
    if (s, x) != (t, y):
        ac = anticommutator(a, b).toarray()[:, space.interior()]
        assert np.abs(ac).max() < 1e-15
