# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Newton kernel for chains of the form

    S(x_0..x_r) = sum_k a_k/2 (x_k - x_0)^2 + V(x_0) + c0,
    V(x) = sum_m lam_m/(2 pi m)^2 (1 - cos 2 pi m x).

Same algorithm as ``peierls._newton.newton_minimize``: zigzag-ordered band
Cholesky, Levenberg shifts, Armijo backtracking.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, fabs, isfinite

cnp.import_array()

cdef double TWO_PI = 6.283185307179586
cdef double ARMIJO = 1e-4
cdef double MIN_STEP = 1e-10
cdef double MU_FLOOR = 1e-12
cdef double MU_START = 1e-8
cdef double MU_MAX = 1e12


cdef struct Chain:
    int p
    double q
    int r
    double* a
    int nm
    double* lam
    double c0
    int fixed0
    int n          # number of free sites
    int b          # band half-width
    long* pos      # zigzag position of each site, -1 if pinned


cdef inline double ext(double* v, Chain* c, int idx) nogil:
    cdef int n = idx // c.p
    return v[idx - n * c.p] + n * c.q


cdef double energy(double* v, Chain* c) nogil:
    cdef int j, k, m
    cdef double f = 0.0, xj, d, w
    for j in range(c.p):
        xj = v[j]
        for k in range(c.r):
            d = ext(v, c, j + k + 1) - xj
            f += 0.5 * c.a[k] * d * d
        for m in range(c.nm):
            w = TWO_PI * (m + 1)
            f += c.lam[m] / (w * w) * (1.0 - cos(w * xj))
    return f + c.p * c.c0


cdef void gradient(double* v, Chain* c, double* g) nogil:
    cdef int j, k, m, u
    cdef double xj, d, w
    for j in range(c.p):
        g[j] = 0.0
    for j in range(c.p):
        xj = v[j]
        for k in range(c.r):
            u = (j + k + 1) % c.p
            d = c.a[k] * (ext(v, c, j + k + 1) - xj)
            g[j] -= d
            g[u] += d
        for m in range(c.nm):
            w = TWO_PI * (m + 1)
            g[j] += c.lam[m] / w * sin(w * xj)


cdef void hessian_band(double* v, Chain* c, double* ab) nogil:
    """Lower band storage ab[d * n + col] = H[col + d, col] in zigzag order."""
    cdef int j, k, m, u, n = c.n
    cdef long pj, pu, lo, hi
    cdef double h
    for j in range((c.b + 1) * n):
        ab[j] = 0.0
    for j in range(c.p):
        pj = c.pos[j]
        if pj >= 0:
            h = 0.0
            for m in range(c.nm):
                h += c.lam[m] * cos(TWO_PI * (m + 1) * v[j])
            ab[pj] += h
        for k in range(c.r):
            u = (j + k + 1) % c.p
            if u == j:
                continue
            pu = c.pos[u]
            if pj >= 0:
                ab[pj] += c.a[k]
            if pu >= 0:
                ab[pu] += c.a[k]
            if pj >= 0 and pu >= 0:
                lo = pj if pj < pu else pu
                hi = pu if pj < pu else pj
                ab[(hi - lo) * n + lo] -= c.a[k]


cdef int band_cholesky(double* ab, int n, int b) nogil:
    """In-place lower band Cholesky; returns 0 on success, 1 if not SPD."""
    cdef int i, j, k, k0
    cdef double s, ljj
    for j in range(n):
        s = ab[j]
        k0 = j - b if j > b else 0
        for k in range(k0, j):
            s -= ab[(j - k) * n + k] * ab[(j - k) * n + k]
        if not (s > 0.0) or not isfinite(s):
            return 1
        ljj = sqrt(s)
        ab[j] = ljj
        for i in range(j + 1, (j + b if j + b < n - 1 else n - 1) + 1):
            s = ab[(i - j) * n + j]
            k0 = i - b if i > b else 0
            for k in range(k0, j):
                s -= ab[(i - k) * n + k] * ab[(j - k) * n + k]
            ab[(i - j) * n + j] = s / ljj
    return 0


cdef void band_solve(double* L, int n, int b, double* y) nogil:
    cdef int i, k, k0, k1
    cdef double s
    for i in range(n):
        s = y[i]
        k0 = i - b if i > b else 0
        for k in range(k0, i):
            s -= L[(i - k) * n + k] * y[k]
        y[i] = s / L[i]
    for i in range(n - 1, -1, -1):
        s = y[i]
        k1 = i + b if i + b < n - 1 else n - 1
        for k in range(i + 1, k1 + 1):
            s -= L[(k - i) * n + i] * y[k]
        y[i] = s / L[i]


cdef int newton_core(double* v, Chain* c, double tol, int max_iters,
                     double* work, double* out) nogil:
    """Returns 1 if converged.  out = [action, residual norm, iterations]."""
    cdef int p = c.p, n = c.n, b = c.b, nb = (c.b + 1) * c.n
    cdef double* g = work
    cdef double* hb = work + p
    cdef double* lb = hb + nb
    cdef double* d = lb + nb
    cdef double* vn = d + n
    cdef double* rhs = vn + p
    cdef int it, i, j, start = 1 if c.fixed0 else 0, ok
    cdef double f, fn, gn, mu = 0.0, scale, slope, t, allowance

    f = energy(v, c)
    gradient(v, c, g)
    gn = 0.0
    for i in range(start, p):
        if fabs(g[i]) > gn:
            gn = fabs(g[i])
    for it in range(max_iters):
        if gn <= tol:
            out[0] = f; out[1] = gn; out[2] = it
            return 1
        hessian_band(v, c, hb)
        scale = 1.0
        for i in range(n):
            if fabs(hb[i]) > scale:
                scale = fabs(hb[i])
        if mu < MU_FLOOR * scale:
            mu = MU_FLOOR * scale
        while True:
            for i in range(nb):
                lb[i] = hb[i]
            for i in range(n):
                lb[i] += mu
            if band_cholesky(lb, n, b) == 0:
                break
            mu = 4.0 * mu if 4.0 * mu > MU_START * scale else MU_START * scale
            if mu > MU_MAX * scale:
                out[0] = f; out[1] = gn; out[2] = it
                return 0
        for j in range(start, p):
            rhs[c.pos[j]] = -g[j]
        band_solve(lb, n, b, rhs)
        slope = 0.0
        for j in range(start, p):
            d[j - start] = rhs[c.pos[j]]
            slope += g[j] * d[j - start]
        t = 1.0
        allowance = 1e-14 * (fabs(f) if fabs(f) > 1.0 else 1.0)
        ok = 0
        while t >= MIN_STEP:
            for j in range(p):
                vn[j] = v[j]
            for j in range(start, p):
                vn[j] += t * d[j - start]
            fn = energy(vn, c)
            if fn <= f + ARMIJO * t * slope + allowance:
                ok = 1
                break
            t *= 0.5
        if not ok:
            mu = 4.0 * mu if 4.0 * mu > MU_START * scale else MU_START * scale
            if mu > MU_MAX * scale:
                out[0] = f; out[1] = gn; out[2] = it
                return 0
            continue
        for j in range(p):
            v[j] = vn[j]
        f = fn
        gradient(v, c, g)
        gn = 0.0
        for i in range(start, p):
            if fabs(g[i]) > gn:
                gn = fabs(g[i])
        if t == 1.0:
            mu = 0.25 * mu if mu > MU_START * scale else 0.0
    out[0] = f; out[1] = gn; out[2] = max_iters
    return 1 if gn <= tol else 0


def fk_newton(v0, int p, long q, a, lam, double c0, bint fixed0=False,
              double tol=1e-10, int max_iters=500):
    """Minimize ``W_{p,q}`` from ``v0``; returns (values, action, residual, iters, converged)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.array(v0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lv = np.ascontiguousarray(lam, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(3)
    cdef Chain c
    cdef int n = p - 1 if fixed0 else p
    cdef int conv
    if v.shape[0] != p:
        raise ValueError("v0 must have p entries")
    from .banded import zigzag_order, band_width
    order = zigzag_order(p, fixed0)
    cdef cnp.ndarray[long, ndim=1] pos = np.full(p, -1, dtype=np.int_)
    pos[order] = np.arange(n)
    c.p = p
    c.q = <double> q
    c.r = av.shape[0]
    c.a = &av[0]
    c.nm = lv.shape[0]
    c.lam = &lv[0] if lv.shape[0] > 0 else NULL
    c.c0 = c0
    c.fixed0 = fixed0
    c.n = n
    c.b = band_width(p, c.r, fixed0)
    c.pos = &pos[0]
    if fixed0 and p == 1:
        return v, energy(&v[0], &c), 0.0, 0, True
    cdef cnp.ndarray[cnp.float64_t, ndim=1] work = np.zeros(3 * p + 2 * (c.b + 1) * n + n + 1)
    with nogil:
        conv = newton_core(&v[0], &c, tol, max_iters, &work[0], &out[0])
    return v, float(out[0]), float(out[1]), int(out[2]), bool(conv)


def fk_energy(v0, int p, long q, a, lam, double c0):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.ascontiguousarray(v0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lv = np.ascontiguousarray(lam, dtype=np.float64)
    cdef Chain c
    c.p = p
    c.q = <double> q
    c.r = av.shape[0]
    c.a = &av[0]
    c.nm = lv.shape[0]
    c.lam = &lv[0] if lv.shape[0] > 0 else NULL
    c.c0 = c0
    return energy(&v[0], &c)
