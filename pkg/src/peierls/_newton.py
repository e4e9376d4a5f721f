"""Pure-Python damped Newton iteration for periodic actions.

This is the reference implementation and the fallback when the compiled
kernel is unavailable.  It works for any ``LocalPotential``.
"""

from __future__ import annotations

import numpy as np

from . import banded

ARMIJO = 1e-4
MIN_STEP = 1e-10
MU_FLOOR = 1e-12   # relative Levenberg floor; keeps the translation mode of W_{p,q} invertible
MU_START = 1e-8
MU_MAX = 1e12


class ChainEvaluator:
    """Action, gradient and cyclic-diagonal Hessian of ``W_{p,q}`` on raw arrays."""

    def __init__(self, pot, p, q):
        self.pot, self.p, self.q = pot, p, q
        r = pot.range
        idx = np.arange(p)[:, None] + np.arange(r + 1)[None, :]
        self._n, self._j = np.divmod(idx, p)
        self._scatter = (idx % p).ravel()
        self._rows = [(np.arange(p) + m) % p for m in range(r + 1)]

    def windows(self, v):
        return v[self._j] + self._n * self.q

    def energy(self, v):
        return float(np.sum(self.pot.evaluate(self.windows(v))))

    def gradient(self, v):
        G = self.pot.gradient(self.windows(v))
        return np.bincount(self._scatter, weights=G.ravel(), minlength=self.p)

    def hessian_diagonals(self, v):
        r = self.pot.range
        H = self.pot.hessian(self.windows(v))
        diags = np.zeros((2 * r + 1, self.p))
        for m in range(r + 1):
            rows = self._rows[m]
            for n in range(r + 1):
                np.add.at(diags[n - m + r], rows, H[:, m, n])
        return diags


def newton_minimize(pot, v0, p, q, fixed0=False, tol=1e-10, max_iters=500):
    """Damped Newton with Levenberg shifts and Armijo backtracking.

    Returns ``(values, action, residual_norm, iterations, converged)``; the
    residual excludes component 0 when ``fixed0``.
    """
    ev = ChainEvaluator(pot, p, q)
    v = np.array(v0, dtype=float)
    f = ev.energy(v)
    if fixed0 and p == 1:
        return v, f, 0.0, 0, True
    free = slice(1, None) if fixed0 else slice(None)
    offset = 1 if fixed0 else 0
    g = ev.gradient(v)
    mu = 0.0
    gn = float(np.max(np.abs(g[free])))
    for it in range(max_iters):
        if gn <= tol:
            return v, f, gn, it, True
        ab, order = banded.lower_band(ev.hessian_diagonals(v), fixed0)
        scale = max(1.0, float(np.max(np.abs(ab[0]))))
        floor = MU_FLOOR * scale
        mu = max(mu, floor)
        cb = banded.factor(ab, mu)
        while cb is None:
            mu = max(4.0 * mu, MU_START * scale)
            if mu > MU_MAX * scale:
                return v, f, gn, it, False
            cb = banded.factor(ab, mu)
        gf = g[free]
        d = np.empty_like(gf)
        d[order - offset] = -banded.solve(cb, gf[order - offset])
        slope = float(gf @ d)
        t = 1.0
        allowance = 1e-14 * max(1.0, abs(f))
        while t >= MIN_STEP:
            vn = v.copy()
            vn[free] += t * d
            fn = ev.energy(vn)
            if fn <= f + ARMIJO * t * slope + allowance:
                break
            t *= 0.5
        else:
            mu = max(4.0 * mu, MU_START * scale)
            if mu > MU_MAX * scale:
                return v, f, gn, it, False
            continue
        v, f = vn, fn
        g = ev.gradient(v)
        gn = float(np.max(np.abs(g[free])))
        if t == 1.0:
            mu = 0.25 * mu if mu > MU_START * scale else 0.0
    return v, f, gn, max_iters, gn <= tol
