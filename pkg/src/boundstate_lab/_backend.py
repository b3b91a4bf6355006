"""Kernel backend selection.

The hot loops (fermion operator assembly, diagonal lattice interactions and
the energy-denominator double sums of dispersion theory) exist twice: a
numba ``@njit`` version and a pure-numpy version.  The environment variable
``BOUNDSTATE_LAB_BACKEND`` picks one of ``numba`` or ``numpy``; when unset,
numba is used if it can be imported.
"""

import os

import numpy as np

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


def _requested_backend():
    name = os.environ.get("BOUNDSTATE_LAB_BACKEND", "").strip().lower()
    if name in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in ("numba", "numpy"):
        raise ValueError(
            f"BOUNDSTATE_LAB_BACKEND must be 'numba' or 'numpy', got {name!r}"
        )
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("BOUNDSTATE_LAB_BACKEND=numba but numba is not installed")
    return name


BACKEND = _requested_backend()


def thread_cap():
    """Parallelism cap from ``BOUNDSTATE_LAB_THREADS`` (``None`` if unset)."""
    raw = os.environ.get("BOUNDSTATE_LAB_THREADS")
    if raw is None or raw.strip() == "":
        return None
    n = int(raw)
    if n < 1:
        raise ValueError("BOUNDSTATE_LAB_THREADS must be a positive integer")
    return n


if HAVE_NUMBA and thread_cap() is not None:
    numba.set_num_threads(min(thread_cap(), numba.config.NUMBA_NUM_THREADS))


# --------------------------------------------------------------------------
# fermion operator assembly


@njit(cache=True)
def _fermion_entries_jit(states, mode, create):
    n = states.shape[0]
    bit = np.int64(1) << mode
    below = bit - 1
    rows = np.empty(n, dtype=np.int64)
    cols = np.empty(n, dtype=np.int64)
    vals = np.empty(n, dtype=np.float64)
    k = 0
    for j in range(n):
        s = states[j]
        occupied = (s & bit) != 0
        if occupied == create:
            continue
        t = s ^ bit
        i = np.searchsorted(states, t)
        if i >= n or states[i] != t:
            continue
        x = s & below
        parity = 0
        while x:
            x &= x - 1
            parity ^= 1
        rows[k] = i
        cols[k] = j
        vals[k] = -1.0 if parity else 1.0
        k += 1
    return rows[:k], cols[:k], vals[:k]


def _fermion_entries_np(states, mode, create):
    bit = np.int64(1) << mode
    occupied = (states & bit) != 0
    cols = np.nonzero(occupied != create)[0]
    targets = states[cols] ^ bit
    rows = np.searchsorted(states, targets)
    rows_clipped = np.minimum(rows, states.size - 1)
    found = (rows < states.size) & (states[rows_clipped] == targets)
    cols = cols[found]
    rows = rows[found]
    parity = np.bitwise_count(states[cols] & (bit - 1)) & 1
    vals = np.where(parity == 1, -1.0, 1.0)
    return rows.astype(np.int64), cols.astype(np.int64), vals


def fermion_entries(states, mode, create):
    """Nonzero entries of a single fermion mode operator.

    Parameters
    ----------
    states : ndarray of int64
        Sorted occupation bit patterns of the basis.
    mode : int
        Jordan-Wigner mode index.
    create : bool
        Build the creation operator if True, the annihilator otherwise.

    Returns
    -------
    rows, cols, vals : ndarray
        COO triplets; ``vals`` holds the Jordan-Wigner signs.
    """
    states = np.ascontiguousarray(states, dtype=np.int64)
    if BACKEND == "numba":
        return _fermion_entries_jit(states, int(mode), bool(create))
    return _fermion_entries_np(states, int(mode), bool(create))


# --------------------------------------------------------------------------
# diagonal density-density energies on the exact lattice


@njit(cache=True)
def _density_energy_jit(states, nsites, v11, v22, v12):
    n = states.shape[0]
    out = np.zeros(n, dtype=np.float64)
    occ1 = np.empty(nsites, dtype=np.int64)
    occ2 = np.empty(nsites, dtype=np.int64)
    for j in range(n):
        s = states[j]
        k1 = 0
        k2 = 0
        for x in range(nsites):
            if (s >> x) & 1:
                occ1[k1] = x
                k1 += 1
            if (s >> (x + nsites)) & 1:
                occ2[k2] = x
                k2 += 1
        e = 0.0
        for a in range(k1):
            for b in range(a + 1, k1):
                e += v11[(occ1[a] - occ1[b]) % nsites]
        for a in range(k2):
            for b in range(a + 1, k2):
                e += v22[(occ2[a] - occ2[b]) % nsites]
        for a in range(k1):
            for b in range(k2):
                e += v12[(occ1[a] - occ2[b]) % nsites]
        out[j] = e
    return out


def _density_energy_np(states, nsites, v11, v22, v12):
    sites = np.arange(nsites)
    n1 = ((states[:, None] >> sites) & 1).astype(np.float64)
    n2 = ((states[:, None] >> (sites + nsites)) & 1).astype(np.float64)
    diff = (sites[:, None] - sites[None, :]) % nsites
    w11 = v11[diff]
    w22 = v22[diff]
    w12 = v12[diff]
    # same-species sums over ordered pairs count each pair twice; v(0) never
    # contributes because a site holds at most one fermion of a species
    e11 = 0.5 * np.einsum("si,ij,sj->s", n1, w11, n1) - 0.5 * n1.sum(1) * v11[0]
    e22 = 0.5 * np.einsum("si,ij,sj->s", n2, w22, n2) - 0.5 * n2.sum(1) * v22[0]
    e12 = np.einsum("si,ij,sj->s", n1, w12, n2)
    return e11 + e22 + e12


def density_energy(states, nsites, v11, v22, v12):
    """Diagonal pair-interaction energy of every occupation pattern.

    ``vij[d]`` is the potential between a species-i and a species-j particle
    whose site difference is ``d`` modulo the ring length; ``v11`` and ``v22``
    must be even in ``d``.
    """
    states = np.ascontiguousarray(states, dtype=np.int64)
    args = [np.ascontiguousarray(v, dtype=np.float64) for v in (v11, v22, v12)]
    if BACKEND == "numba":
        return _density_energy_jit(states, int(nsites), *args)
    return _density_energy_np(states, int(nsites), *args)


# --------------------------------------------------------------------------
# second-order energy-denominator sums


@njit(cache=True)
def _gap_sum_jit(weights, ea, eb, e0, skip_i, skip_j):
    na, nb = weights.shape
    total = 0.0
    min_abs = np.inf
    max_den = -np.inf
    for i in range(na):
        for j in range(nb):
            if i == skip_i and j == skip_j:
                continue
            w = weights[i, j]
            if w == 0.0:
                continue
            den = e0 - ea[i] - eb[j]
            a = abs(den)
            if a < min_abs:
                min_abs = a
            if den > max_den:
                max_den = den
            if den != 0.0:
                total += w / den
    return total, min_abs, max_den


def _gap_sum_np(weights, ea, eb, e0, skip_i, skip_j):
    den = e0 - ea[:, None] - eb[None, :]
    mask = weights != 0.0
    if 0 <= skip_i < weights.shape[0] and 0 <= skip_j < weights.shape[1]:
        mask[skip_i, skip_j] = False
    if not mask.any():
        return 0.0, np.inf, -np.inf
    d = den[mask]
    live = d != 0.0
    return float(np.sum(weights[mask][live] / d[live])), float(np.min(np.abs(d))), float(np.max(d))


def gap_weighted_sum(weights, ea, eb, e0, skip=(-1, -1)):
    """Return ``sum_ij w_ij / (e0 - ea_i - eb_j)`` over nonzero weights.

    The channel ``skip`` is excluded (the primed sum of perturbation theory).
    Also returns the smallest |denominator| and the largest denominator among
    included channels so callers can detect degeneracies and sign violations.
    """
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    ea = np.ascontiguousarray(ea, dtype=np.float64)
    eb = np.ascontiguousarray(eb, dtype=np.float64)
    si, sj = (int(skip[0]), int(skip[1]))
    if BACKEND == "numba":
        return _gap_sum_jit(weights, ea, eb, float(e0), si, sj)
    return _gap_sum_np(weights, ea, eb, float(e0), si, sj)
