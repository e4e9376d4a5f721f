"""Independent reference computations used to derive and freeze expected values.

Nothing here imports the solver; each oracle is a direct, slow computation.
"""

import math

import numpy as np
from scipy.optimize import brentq, minimize


def fk_onsite(lam, x):
    return lam / (4 * math.pi ** 2) * (1 - np.cos(2 * np.pi * np.asarray(x)))


def fk_onsite_prime(lam, x):
    return lam / (2 * math.pi) * np.sin(2 * np.pi * np.asarray(x))


def twist_s(K, x, y):
    return 0.5 * (y - x) ** 2 - K / (4 * math.pi ** 2) * np.cos(2 * np.pi * x)


def twist_period2_min(K, step=1e-3):
    """Brute-force grid over (x0, x1) in [0,1)^2, then Nelder-Mead refinement."""
    g = np.arange(0, 1, step)
    X0, X1 = np.meshgrid(g, g, indexing="ij")
    W = twist_s(K, X0, X1) + twist_s(K, X1, X0 + 1)
    i = np.unravel_index(np.argmin(W), W.shape)
    f = lambda v: twist_s(K, v[0], v[1]) + twist_s(K, v[1], v[0] + 1)
    res = minimize(f, [g[i[0]], g[i[1]]], method="Nelder-Mead",
                   options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 20000})
    return float(res.fun)


def fk_period2_constrained(lam, xi):
    """``x_0 = xi`` fixed, interior ``eta`` from the 1-d equilibrium equation.

    Returns the smallest action over all roots in ``[xi, xi + 1]``.
    """
    f = lambda e: (2 * e - xi - (xi + 1)) + fk_onsite_prime(lam, e)
    es = np.linspace(xi, xi + 1, 20001)
    v = f(es)
    roots = [brentq(f, es[k], es[k + 1]) for k in range(len(es) - 1) if v[k] * v[k + 1] < 0]
    W = lambda e: (0.5 * (e - xi) ** 2 + fk_onsite(lam, xi) + 0.5 * (xi + 1 - e) ** 2
                   + fk_onsite(lam, e))
    return min(float(W(r)) for r in roots), roots


def brute_birkhoff_defect(values, p, q, k_max, l_max):
    """Crossing size by explicit enumeration of translates."""
    def get(i):
        n, j = divmod(i, p)
        return values[j] + n * q
    worst = 0.0
    for k in range(-k_max, k_max + 1):
        for l in range(-l_max, l_max + 1):
            d = [get(i - k) + l - get(i) for i in range(p)]
            worst = max(worst, min(max(0.0, max(d)), max(0.0, -min(d))))
    return worst


def numeric_gradient(f, v, h=1e-6):
    v = np.asarray(v, dtype=float)
    g = np.empty_like(v)
    for i in range(v.size):
        e = np.zeros_like(v)
        e[i] = h
        g[i] = (f(v + e) - f(v - e)) / (2 * h)
    return g


def best_approx_exhaustive(omega, p):
    """``min_{1 <= p' < p} min_q |p' w - q|`` in double precision."""
    ps = np.arange(1, p)
    x = ps * omega
    return float(np.min(np.abs(x - np.round(x))))
