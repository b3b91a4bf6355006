import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.transform import Rotation

from boundstate_lab.atoms import AtomModel, dipole_matrix, hydrogenic_state, solve_hydrogenic
from boundstate_lab.errors import DegenerateDenominator, SeparationTooSmall
from boundstate_lab.processes import pseudo_spectrum
from boundstate_lab.vdw import (
    DipoleDipoleKernel,
    ProximityWarning,
    c6_coefficient,
    coupling_tensor,
    effective_matrix,
    effective_potential,
    first_order_energy,
    gradient_tensors,
    resonant_exchange,
    second_order_energy,
)

from conftest import hydrogen_oscillator_strength

C6_HH = 6.49902670540


def c6_oscillator_oracle(n_max):
    n = np.arange(2, n_max + 1)
    f = hydrogen_oscillator_strength(n)
    w = 0.5 - 0.5 / n**2
    return 1.5 * float(np.sum(np.outer(f, f) / (np.outer(w, w) * (w[:, None] + w[None, :]))))


def test_ground_diagonal_vanishes(model, s1s):
    for order in (1, 2):
        G = coupling_tensor([s1s], model, [0, 0, 20.0], order).G
        assert abs(G[0, 0, 0, 0]) < 1e-12
    assert first_order_energy(s1s, s1s, [0, 0, 20.0], model) == 0


def test_monopole_order_vanishes_for_neutral_atoms(model):
    states = solve_hydrogenic(model, 2)
    assert np.max(np.abs(coupling_tensor(states, model, [3.0, 0, 60.0], 0).G)) == 0


def test_pp_channel_on_axis(model, s1s, s2p):
    t = coupling_tensor([s1s, s2p], model, [0, 0, 60.0], 1)
    d = dipole_matrix(s2p, s1s, model)[2].real
    assert t.element("1s", "1s", "2p+0", "2p+0") == pytest.approx(-2 * d**2 / 60.0**3, rel=1e-12)


def test_exchange_symmetry_order2(model):
    states = solve_hydrogenic(model, 3)
    R = np.array([1.0, 2.0, 100.0])
    g = coupling_tensor(states, model, R, 2).G
    gm = coupling_tensor(states, model, -R, 2).G
    assert np.max(np.abs(g - gm.transpose(1, 0, 3, 2))) < 1e-16


def test_separation_guards(model):
    states = solve_hydrogenic(model, 3)
    with pytest.raises(SeparationTooSmall):
        coupling_tensor(states, model, [0, 0, 10.0])
    with pytest.warns(ProximityWarning):
        coupling_tensor([hydrogenic_state(model, "1s")], model, [0, 0, 8.0])


def test_gradient_tensors_are_harmonic():
    R = np.array([0.3, -1.1, 2.0])
    D = gradient_tensors(R)
    r = np.linalg.norm(R)
    assert D[0] == pytest.approx(1 / r)
    assert np.allclose(D[1], -R / r**3)
    assert abs(np.trace(D[2])) < 1e-14
    assert np.max(np.abs(np.einsum("iik->k", D[3]))) < 1e-14


def test_resonant_pair(model, s1s, s2p):
    R = [0, 0, 60.0]
    assert first_order_energy(s1s, s2p, R, model) == 0
    d = dipole_matrix(s2p, s1s, model)[2].real
    assert resonant_exchange(s1s, s2p, R, model) == pytest.approx(-2 * d**2 / 60.0**3, rel=1e-12)
    assert resonant_exchange(s2p, s1s, [0, 0, -60.0], model) == pytest.approx(resonant_exchange(s1s, s2p, R, model))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=9, max_size=9), st.integers(0, 2**31 - 1))
def test_dipole_kernel_rotation(vals, seed):
    v = np.array(vals).reshape(3, 3)
    x = v[0] + np.array([0, 0, 5.0])
    k = DipoleDipoleKernel(v[1], v[2])
    rot = Rotation.random(random_state=seed).as_matrix()
    kr = DipoleDipoleKernel(rot @ v[1], rot @ v[2])
    assert kr(rot @ x) == pytest.approx(k(x), rel=1e-10, abs=1e-14)


def test_c6_pseudo_spectrum(model, s1s, basis):
    res = second_order_energy(s1s, s1s, 50.0, model, basis)
    assert res.C6 == pytest.approx(C6_HH, rel=0.01)
    assert -res.E2 * 50.0**6 == pytest.approx(res.C6, rel=1e-3)
    assert res.max_denominator < 0
    assert res.E1 == 0 and res.E2 < 0


def test_c6_discrete_matches_oscillator_oracle(model, s1s):
    vals = [c6_coefficient(s1s, solve_hydrogenic(model, n, 1), model) for n in (4, 6, 8, 10)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(c6_oscillator_oracle(10), rel=1e-8)
    assert vals[-1] < C6_HH


def test_dense_resolvent_matches_sum(model, s1s):
    states = solve_hydrogenic(model, 4, 1)
    M = effective_matrix(states, model, [0, 0, 30.0], [(0, 0)])
    E2 = second_order_energy(s1s, s1s, 30.0, model, states, check=False).E2
    assert np.real(M).ravel()[0] == pytest.approx(E2, rel=1e-10)


def test_rotational_invariance(model, s1s, basis):
    a = second_order_energy(s1s, s1s, [0, 0, 30.0], model, basis).E2
    n = np.array([18.0, -10.0, 21.0])
    b = second_order_energy(s1s, s1s, 30.0 * n / np.linalg.norm(n), model, basis).E2
    assert b == pytest.approx(a, rel=1e-10)


def test_multipole_convergence(model, s1s):
    ps2 = pseudo_spectrum(model, (0, 1, 2))
    Rs = np.array([20.0, 40.0, 80.0])
    rel = []
    for R in Rs:
        e1 = second_order_energy(s1s, s1s, R, model, ps2, order=1).E2
        e2 = second_order_energy(s1s, s1s, R, model, ps2, order=2).E2
        rel.append(abs(e2 - e1) / abs(e1))
    slope = np.polyfit(np.log(Rs), np.log(rel), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.3)


def test_effective_potential(model, s1s, basis):
    pot = effective_potential(s1s, basis, model)
    assert np.all(pot.V < 0)
    assert pot.plateau_spread(20.0) < 1e-3
    assert np.allclose(pot.R6V, -pot.C6, rtol=1e-3)


def test_degenerate_channel_refused(model):
    s2s = hydrogenic_state(model, "2s")
    with pytest.raises(DegenerateDenominator):
        second_order_energy(s2s, s2s, 200.0, model, solve_hydrogenic(model, 3, 1), check=False)
