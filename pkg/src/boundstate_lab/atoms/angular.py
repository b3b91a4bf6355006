"""Matrix elements of the unit vector between spherical harmonics.

Closed-form Condon-Shortley recursions for cos(theta) and sin(theta) e^{±i phi};
everything else (gradients, second moments) is assembled from these.
"""

from functools import lru_cache
import math

import numpy as np

LMAX = 6


def _plus_up(l, m):  # <l+1, m+1| sin e^{i phi} |l, m>
    return -math.sqrt((l + m + 1) * (l + m + 2) / ((2 * l + 1) * (2 * l + 3)))


def _plus_down(l, m):  # <l-1, m+1| sin e^{i phi} |l, m>
    if l == 0:
        return 0.0
    return math.sqrt(max((l - m) * (l - m - 1), 0) / ((2 * l - 1) * (2 * l + 1)))


def _minus_up(l, m):  # <l+1, m-1| sin e^{-i phi} |l, m>
    return math.sqrt((l - m + 1) * (l - m + 2) / ((2 * l + 1) * (2 * l + 3)))


def _minus_down(l, m):  # <l-1, m-1| sin e^{-i phi} |l, m>
    if l == 0:
        return 0.0
    return -math.sqrt(max((l + m) * (l + m - 1), 0) / ((2 * l - 1) * (2 * l + 1)))


def _cos_up(l, m):
    return math.sqrt(((l + 1) ** 2 - m * m) / ((2 * l + 1) * (2 * l + 3)))


def _cos_down(l, m):
    if l == 0:
        return 0.0
    return math.sqrt(max(l * l - m * m, 0) / ((2 * l - 1) * (2 * l + 1)))


@lru_cache(maxsize=None)
def unit_vector_element(lp, mp, l, m):
    """<lp mp| r_hat |l m> as a complex Cartesian 3-vector (x, y, z)."""
    out = np.zeros(3, dtype=complex)
    if abs(m) > l or abs(mp) > lp or abs(lp - l) != 1:
        return out
    up = lp == l + 1
    z = 0.0
    plus = 0.0
    minus = 0.0
    if mp == m:
        z = _cos_up(l, m) if up else _cos_down(l, m)
    if mp == m + 1:
        plus = _plus_up(l, m) if up else _plus_down(l, m)
    if mp == m - 1:
        minus = _minus_up(l, m) if up else _minus_down(l, m)
    out[0] = 0.5 * (plus + minus)
    out[1] = (plus - minus) / 2j
    out[2] = z
    out.setflags(write=False)
    return out


def lm_pairs(lmax):
    return [(l, m) for l in range(lmax + 1) for m in range(-l, l + 1)]


@lru_cache(maxsize=None)
def unit_vector_table(lmax=LMAX):
    """Dense matrices <l'm'|r_hat_i|lm> over all (l, m) with l <= lmax."""
    pairs = lm_pairs(lmax)
    n = len(pairs)
    table = np.zeros((3, n, n), dtype=complex)
    for a, (lp, mp) in enumerate(pairs):
        for b, (l, m) in enumerate(pairs):
            table[:, a, b] = unit_vector_element(lp, mp, l, m)
    table.setflags(write=False)
    return pairs, table


def lm_index(l, m):
    return l * l + l + m


@lru_cache(maxsize=None)
def second_moment_element(lp, mp, l, m):
    """<lp mp| r_hat_i r_hat_j |l m> as a complex 3x3 array.

    Inserting the (l +- 1) intermediate shells is exact because r_hat maps a
    definite l into l +- 1 only.
    """
    out = np.zeros((3, 3), dtype=complex)
    if abs(lp - l) not in (0, 2):
        return out
    for lm in (l - 1, l + 1):
        if lm < 0:
            continue
        for mm in range(-lm, lm + 1):
            left = unit_vector_element(lp, mp, lm, mm)
            right = unit_vector_element(lm, mm, l, m)
            out += np.outer(left, right)
    out.setflags(write=False)
    return out
