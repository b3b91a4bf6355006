import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boundstate_lab.errors import ParseError, UnboundVariable, ValidationError
from boundstate_lab.fockspace import enumerate_basis
from boundstate_lab.wick import (
    OpSymbol,
    anticommutator,
    dense_vev,
    enumerate_contractions,
    evaluate_vev,
    normal_order,
    parse_product,
    random_product,
    tilde_map,
    tilde_product,
)

from conftest import make_lattice


@pytest.fixture(scope="module")
def small():
    cfg, sp = make_lattice(4, 6.0, 2)
    return cfg, sp, enumerate_basis(cfg, 4, 4)


def _probed(text, slots):
    return [OpSymbol(o.kind, o.arg, o.label, o.slot, i in slots) for i, o in enumerate(parse_product(text))]


def test_single_contraction():
    (d,) = enumerate_contractions("psi1(x) psi1+(y)")
    assert d.kernel == "delta(x-y)" and d.sign == 1 and d.pairings == ((0, 1),)
    assert enumerate_contractions("psi1+(y) psi1(x)") == []


@pytest.mark.parametrize("text", ["psi1(x)", "psi1(x) psi1+(y) psi2(z)", "phi[0](z) psi1+(x) psi2+(y) psi1(w)"])
def test_odd_or_unbalanced_gives_nothing(text):
    assert enumerate_contractions(text) == []


def test_empty_product_rejected():
    with pytest.raises(ValidationError):
        enumerate_contractions([])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_matching_count_factorial(n):
    text = " ".join(f"psi1(x{i})" for i in range(n)) + " " + " ".join(f"psi1+(y{i})" for i in range(n))
    ds = enumerate_contractions(text)
    assert len(ds) == math.factorial(n)
    assert sum(d.sign for d in ds) == 0 if n > 1 else 1


@pytest.mark.parametrize("text, slots, classes", [
    ("psi1(x) psi1+(u) psi1(v) psi1+(y)", (1, 2), ["A1"]),
    ("psi1(x) psi2(w) psi1+(u) psi1(v) phi+[0](z)", (2, 3), ["A2"]),
    ("phi[0](z) psi1+(u) psi1(v) psi1+(y) psi2+(w)", (1, 2), ["A3"]),
    ("phi[0](a) psi2(b) psi1+(u) psi1(v) phi+[0](c) psi2+(d)", (2, 3), ["A4", "A5"]),
])
def test_probe_diagram_classes(text, slots, classes):
    ds = enumerate_contractions(_probed(text, slots))
    assert sorted(d.diagram_class for d in ds) == classes
    for d in ds:
        assert set(slots) not in [set(p) for p in d.pairings]


def test_all_five_classes_present():
    seen = set()
    for text, slots in [
        ("psi1(x) psi1+(u) psi1(v) psi1+(y)", (1, 2)),
        ("psi1(x) psi2(w) psi1+(u) psi1(v) phi+[0](z)", (2, 3)),
        ("phi[0](z) psi1+(u) psi1(v) psi1+(y) psi2+(w)", (1, 2)),
        ("phi[0](a) psi2(b) psi1+(u) psi1(v) phi+[0](c) psi2+(d)", (2, 3)),
    ]:
        seen |= {d.diagram_class for d in enumerate_contractions(_probed(text, slots))}
    assert seen == {"A1", "A2", "A3", "A4", "A5"}


def test_composite_normalization(small):
    cfg, sp, _ = small
    nb = len(sp.bound)
    for a in range(nb):
        for b in range(nb):
            for z in range(cfg.sites):
                for zp in range(cfg.sites):
                    v = evaluate_vev(f"phi[{a}](z) phi+[{b}](w)", {"z": z, "w": zp}, sp, cfg).value
                    assert abs(v - (a == b and z == zp)) < 1e-12


def test_wavefunction_support():
    cfg, sp = make_lattice(8, 8.0, 3)
    phi = sp.states[0].phi
    for z in range(8):
        v = evaluate_vev("phi[0](z) psi2+(b) psi1+(c)", {"z": z, "b": 0, "c": 4}, sp, cfg).value
        if z != cfg.anchor(4, 0):
            assert v == 0
        else:
            # separation 4 > a: only the exponential tail of the pair state remains
            assert v == pytest.approx(-phi[4], rel=1e-12)
            assert abs(v) < 1e-3 * abs(phi[0])


def test_six_operator_mixed_product(small):
    cfg, sp, space = small
    text = "psi1(a) psi2(b) phi[0](c) phi+[0](d) psi2+(e) psi1+(f)"
    pos = {"a": 0, "b": 1, "c": 2, "d": 2, "e": 1, "f": 0}
    kv = evaluate_vev(text, pos, sp, cfg)
    assert kv.n_diagrams > 1
    assert abs(kv.value - dense_vev(text, pos, sp, space)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_products_match_dense(small, seed):
    cfg, sp, space = small
    rng = np.random.default_rng(seed)
    text, pos = random_product(rng, cfg.sites, len(sp.bound))
    a = evaluate_vev(text, pos, sp, cfg).value
    b = dense_vev(text, pos, sp, space)
    assert abs(a - b) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_adjacent_swap_flips_sign(small, seed):
    cfg, sp, _ = small
    rng = np.random.default_rng(seed)
    xs = rng.integers(0, cfg.sites, 4)
    pos = {f"x{i}": int(x) for i, x in enumerate(xs)}
    a = evaluate_vev("psi1(x0) psi1(x1) psi1+(x2) psi1+(x3)", pos, sp, cfg).value
    b = evaluate_vev("psi1(x1) psi1(x0) psi1+(x2) psi1+(x3)", pos, sp, cfg).value
    assert a == -b


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_conjugation_symmetry(small, seed):
    cfg, sp, _ = small
    rng = np.random.default_rng(seed)
    text, pos = random_product(rng, cfg.sites, len(sp.bound))
    ops = parse_product(text)
    flip = {"psi1": "psi1_dag", "psi2": "psi2_dag", "phi": "phi_dag"}
    flip.update({v: k for k, v in flip.items()})
    rev = [OpSymbol(flip[o.kind], o.arg, o.label) for o in reversed(ops)]
    a = evaluate_vev(ops, pos, sp, cfg).value
    b = evaluate_vev(rev, pos, sp, cfg).value
    assert abs(a - np.conj(b)) < 1e-12


@pytest.mark.parametrize("text", ["psi3(x)", "phi(z)", "psi1[a](x)", "psi1 x", ""])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_product(text)


def test_unbound_variables(small):
    cfg, sp, _ = small
    with pytest.raises(UnboundVariable):
        evaluate_vev("psi1(x) psi1+(y)", {"x": 0}, sp, cfg)
    with pytest.raises(UnboundVariable):
        evaluate_vev("phi[a](z) phi+[a](w)", {"z": 0, "w": 0}, sp, cfg)
    v = evaluate_vev("phi[a](z) phi+[b](w)", {"z": 1, "w": 1}, sp, cfg, labels={"a": 0, "b": 0})
    assert v.value == pytest.approx(1.0)


@pytest.mark.parametrize("p, q", [("psi1", "psi1"), ("psi1", "psi2"), ("psi2", "psi2"),
                                  ("psi1+", "psi1+"), ("psi1+", "psi2+"), ("psi2+", "psi2+")])
def test_tilde_fields_anticommute(p, q):
    assert anticommutator(tilde_map(p, "u"), tilde_map(q, "v")).is_zero


def test_tilde_product_factorizes():
    prod = tilde_product([("psi1+", "u"), ("psi1", "v")])
    assert len(prod.terms) == 4
    direct = tilde_map("psi1+", "u") * tilde_map("psi1", "v")
    assert (normal_order(prod - direct)).is_zero


def test_tilde_of_annihilator_on_vacuum():
    terms = tilde_map("psi1", "v").terms
    assert [o.name for o in terms[0].ops] == ["chi1"]
    assert [o.name for o in terms[1].ops] == ["phi", "chi2+"]
    with pytest.raises(ValidationError):
        tilde_map("phi", "v")
