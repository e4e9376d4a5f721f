"""Cyclic banded systems reordered into ordinary banded ones.

A ring of ``p`` sites with couplings up to distance ``r`` becomes a band of
half-width ``2r`` under the zigzag ordering ``0, p-1, 1, p-2, 2, ...``.
Removing a site (the pinned ``x_0`` of a constrained solve) keeps the band.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded


def zigzag_order(p, drop_first=False):
    order = np.empty(p, dtype=np.intp)
    order[0::2] = np.arange((p + 1) // 2)
    order[1::2] = p - 1 - np.arange(p // 2)
    if drop_first:
        order = order[1:]
    return order


def band_width(p, r, drop_first=False):
    n = p - 1 if drop_first else p
    return max(0, min(2 * r, n - 1))


def lower_band(diags, drop_first=False):
    """Lower band storage ``ab[d, j] = A[j + d, j]`` in zigzag order."""
    r = (diags.shape[0] - 1) // 2
    p = diags.shape[1]
    order = zigzag_order(p, drop_first)
    n = order.size
    pos = np.full(p, -1, dtype=np.intp)
    pos[order] = np.arange(n)
    b = band_width(p, r, drop_first)
    ab = np.zeros((b + 1, n))
    i = np.arange(p)
    for d in range(-r, r + 1):
        pr, pc = pos[i], pos[(i + d) % p]
        keep = (pr >= 0) & (pc >= 0) & (pr >= pc)
        np.add.at(ab, (pr[keep] - pc[keep], pc[keep]), diags[d + r][keep])
    return ab, order


def factor(ab, shift=0.0):
    """Cholesky factor of ``A + shift I``; ``None`` if not positive definite."""
    a = ab.copy()
    a[0] += shift
    try:
        return cholesky_banded(a, lower=True, check_finite=False)
    except LinAlgError:
        return None


def solve(cb, rhs):
    return cho_solve_banded((cb, True), rhs, check_finite=False)


def solve_cyclic(diags, rhs, drop_first=False, shift=0.0):
    """Solve ``(A + shift I) u = rhs`` for a cyclic banded SPD matrix.

    ``rhs`` is indexed by site; with ``drop_first`` site 0 is excluded and
    ``rhs`` has length ``p - 1`` (sites ``1..p-1``).
    """
    ab, order = lower_band(diags, drop_first)
    cb = factor(ab, shift)
    if cb is None:
        raise LinAlgError("matrix is not positive definite")
    offset = 1 if drop_first else 0
    u = solve(cb, np.asarray(rhs, dtype=float)[order - offset])
    out = np.empty_like(u)
    out[order - offset] = u
    return out
