import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from boundstate_lab import _backend as kb

pytestmark = pytest.mark.skipif(not kb.HAVE_NUMBA, reason="numba not installed")


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.booleans())
def test_fermion_entries_agree(nsites, seed, create):
    rng = np.random.default_rng(seed)
    nbits = 2 * nsites
    states = np.unique(rng.integers(0, 2**nbits, 40)).astype(np.int64)
    mode = int(rng.integers(nbits))
    a = kb._fermion_entries_jit(states, mode, create)
    b = kb._fermion_entries_np(states, mode, create)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_density_energy_agree(nsites, seed):
    rng = np.random.default_rng(seed)
    states = np.unique(rng.integers(0, 2 ** (2 * nsites), 30)).astype(np.int64)
    v11, v22, v12 = rng.normal(size=(3, nsites))
    # same-species potentials are even in the site difference
    v11 = v11 + np.roll(v11[::-1], 1)
    v22 = v22 + np.roll(v22[::-1], 1)
    a = kb._density_energy_jit(states, nsites, v11, v22, v12)
    b = kb._density_energy_np(states, nsites, v11, v22, v12)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_gap_sum_agree(na, nb, seed):
    rng = np.random.default_rng(seed)
    w = rng.random((na, nb))
    w[w < 0.3] = 0.0
    ea, eb = rng.uniform(-0.5, 5, na), rng.uniform(-0.5, 5, nb)
    si, sj = int(rng.integers(-1, na)), int(rng.integers(-1, nb))
    a = kb._gap_sum_jit(w, ea, eb, -1.0, si, sj)
    b = kb._gap_sum_np(w, ea, eb, -1.0, si, sj)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_gap_sum_skips_zero_denominator():
    w = np.ones((2, 2))
    e = np.array([0.0, 1.0])
    for fn in (kb._gap_sum_jit, kb._gap_sum_np):
        total, min_abs, _ = fn(w, e, e, 0.0, -1, -1)
        assert min_abs == 0.0 and np.isfinite(total)


def test_env_flag_selects_numpy():
    code = "from boundstate_lab import _backend; print(_backend.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={"BOUNDSTATE_LAB_BACKEND": "numpy", "PATH": ""}, check=True)
    assert out.stdout.strip() == "numpy"
    bad = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={"BOUNDSTATE_LAB_BACKEND": "fortran", "PATH": ""})
    assert bad.returncode != 0
