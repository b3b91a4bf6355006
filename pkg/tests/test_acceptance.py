"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import pytest

from boundstate_lab.acceptance import A_2P_1S_PER_S, CHECKS


def _run(k, capsys):
    r = CHECKS[k]()
    with capsys.disabled():
        print("\n" + r.line)
    return r


def test_criterion_01_levels(capsys):
    r = _run(1, capsys)
    assert r.metrics["max_relative_deviation"] <= 1e-4
    assert r.runtime_s < 5.0
    assert r.passed


def test_criterion_02_emission(capsys):
    r = _run(2, capsys)
    assert r.metrics["rate_per_s"] == pytest.approx(6.27e8, rel=5e-3)
    assert r.metrics["rate_per_s"] == pytest.approx(A_2P_1S_PER_S, rel=1e-10)
    assert r.metrics["rate_2s_1s"] == 0.0
    assert r.runtime_s < 1.0
    assert r.passed


def test_criterion_03_polarizability(capsys):
    r = _run(3, capsys)
    assert r.metrics["alpha_pseudo"] == pytest.approx(4.5, rel=5e-3)
    d = r.metrics["alpha_discrete"]
    assert all(x < 4.5 for x in d)
    assert all(b > a for a, b in zip(d, d[1:]))
    assert r.passed


def test_criterion_04_rayleigh(capsys):
    r = _run(4, capsys)
    assert r.metrics["slope"] == pytest.approx(4.0, abs=0.02)
    assert r.metrics["prefactor_ratio"] == pytest.approx(1.0, abs=0.02)
    assert r.passed


def test_criterion_05_vdw(capsys):
    r = _run(5, capsys)
    assert r.metrics["G_1s1s_1s1s"] <= 1e-12
    assert r.metrics["V_negative"]
    assert r.metrics["C6"] == pytest.approx(6.499, rel=0.01)
    assert r.metrics["plateau_spread"] <= 1e-3
    assert r.runtime_s < 60.0
    assert r.passed


def test_criterion_06_electron_amplitude(capsys):
    r = _run(6, capsys)
    assert r.metrics["elastic_max"] <= 1e-12
    assert r.metrics["odd_residual_max"] <= 1e-12
    assert r.passed


def test_criterion_07_fockspace(capsys):
    r = _run(7, capsys)
    m = r.metrics
    assert m["vacuum_commutator"] <= 1e-12
    assert m["tilde_anticommutator"] <= 1e-12
    g = m["gram_deviation"]
    assert all(x < b for x, b in zip(g, m["gram_bound"]))
    assert all(y < x for x, y in zip(g, g[1:]))
    for sectors in m["effective_vs_exact"].values():
        assert sectors["decay"] == 0.0
        assert max(sectors.values()) <= 1e-10
    assert r.runtime_s < 60.0
    assert r.passed


def test_criterion_08_wick(capsys):
    r = _run(8, capsys)
    assert r.metrics["products"] == 200
    assert r.metrics["max_deviation"] <= 1e-12
    assert r.metrics["diagram_counts"] == [1, 2, 6, 24]
    assert r.passed


def test_criterion_09_boost(capsys):
    r = _run(9, capsys)
    assert len(r.metrics["velocities"]) == 2
    assert max(r.metrics["max_deviation"]) <= 1e-10
    assert r.passed


def test_criterion_10_momentum_identity(capsys):
    r = _run(10, capsys)
    assert r.metrics["max_deviation"] <= 1e-6
    assert r.passed
