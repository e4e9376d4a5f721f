"""Finite and periodic actions, their derivatives, and the estimate constants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import PeriodicConfiguration, Window
from .potential import LocalPotential, _check_finite, sample_box

SUP_INFLATION = 1.1


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class ActionValue:
    value: float
    segment: tuple = None
    period: tuple = None

    def __float__(self):
        return self.value


def segment_action(pot: LocalPotential, w: Window, lo=None, hi=None) -> ActionValue:
    """``W_[lo,hi] = sum_{j=lo..hi} S(x_j..x_{j+r})`` on a window.

    By default the sum runs over every ``j`` whose stencil fits in ``w``.
    """
    r = pot.range
    lo = w.lo if lo is None else lo
    hi = w.hi - r if hi is None else hi
    if hi < lo:
        raise ShapeError(f"empty summation range [{lo}, {hi}]")
    if lo < w.lo or hi + r > w.hi:
        raise ShapeError(f"window [{w.lo}, {w.hi}] does not cover [{lo}, {hi + r}]")
    v = w.values
    start = lo - w.lo
    idx = start + np.arange(hi - lo + 1)[:, None] + np.arange(r + 1)[None, :]
    X = v[idx]
    S = pot.evaluate(X)
    _check_finite(pot, X, S)
    return ActionValue(float(np.sum(S)), segment=(lo, hi))


def periodic_action(pot: LocalPotential, x: PeriodicConfiguration) -> ActionValue:
    """``W_{p,q}(x) = sum_{j=0}^{p-1} S(x_j..x_{j+r})``."""
    X = x.windows(pot.range)
    S = pot.evaluate(X)
    _check_finite(pot, X, S)
    return ActionValue(float(np.sum(S)), period=(x.p, x.q))


def residual(pot: LocalPotential, x: PeriodicConfiguration, i: int) -> float:
    """``R_i = sum_{j=i-r}^{i} d_{i-j} S(x_j..x_{j+r})``."""
    r = pot.range
    j = np.arange(i - r, i + 1)
    X = x.get(j[:, None] + np.arange(r + 1)[None, :])
    G = pot.gradient(X)
    return float(np.sum(G[np.arange(r + 1), i - j]))


def _scatter_index(p, r):
    return (np.arange(p)[:, None] + np.arange(r + 1)[None, :]) % p


def periodic_gradient(pot: LocalPotential, x: PeriodicConfiguration) -> np.ndarray:
    r = pot.range
    G = pot.gradient(x.windows(r))
    return np.bincount(_scatter_index(x.p, r).ravel(), weights=G.ravel(), minlength=x.p)


class CyclicBandMatrix:
    """Symmetric ``p x p`` matrix stored by cyclic diagonals.

    ``diags[d + r, i]`` holds the contribution to ``A[i, (i + d) mod p]``
    for ``-r <= d <= r``.  When ``p <= 2r`` several diagonals land on the
    same entry and are summed.
    """

    def __init__(self, diags: np.ndarray):
        self.diags = np.asarray(diags, dtype=float)
        self.r = (self.diags.shape[0] - 1) // 2
        self.p = self.diags.shape[1]

    def to_dense(self):
        A = np.zeros((self.p, self.p))
        i = np.arange(self.p)
        for d in range(-self.r, self.r + 1):
            np.add.at(A, (i, (i + d) % self.p), self.diags[d + self.r])
        return A

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        out = np.zeros(self.p)
        for d in range(-self.r, self.r + 1):
            out += self.diags[d + self.r] * np.roll(v, -d)
        return out

    def diagonal(self):
        return np.diag(self.to_dense()) if self.p <= 2 * self.r else self.diags[self.r].copy()


def hessian_diagonals(pot: LocalPotential, x: PeriodicConfiguration) -> np.ndarray:
    """Cyclic-diagonal storage of the Hessian of ``W_{p,q}``."""
    r, p = pot.range, x.p
    H = pot.hessian(x.windows(r))
    diags = np.zeros((2 * r + 1, p))
    j = np.arange(p)
    for m in range(r + 1):
        for n in range(r + 1):
            row = (j + m) % p
            np.add.at(diags[n - m + r], row, H[:, m, n])
    return diags


def periodic_hessian(pot: LocalPotential, x: PeriodicConfiguration) -> CyclicBandMatrix:
    return CyclicBandMatrix(hessian_diagonals(pot, x))


@dataclass(frozen=True)
class LipschitzEstimate:
    """Sampled sup of the first partials on X_K and the resulting constant."""

    k_cap: float
    sup_partial: float
    sample_count: int
    inflation: float
    r: int

    @property
    def D_raw(self):
        return (self.r + 1) * self.sup_partial

    @property
    def D(self):
        return self.D_raw * self.inflation


def lipschitz_constant(pot: LocalPotential, k_cap: float, samples=10_000, seed=0,
                       inflation=SUP_INFLATION) -> LipschitzEstimate:
    """Estimate ``D = (r + 1) sup_{X_K} max_k |d_k S|``.

    Points of X_K are parametrized by ``x_0 in [0, 1)`` (periodicity) and
    steps ``|x_{i+1} - x_i| <= K``; Sobol samples are augmented with every
    vertex of the step box over a grid of ``x_0``.
    """
    if k_cap <= 0:
        raise ValueError("k_cap must be positive")
    r = pot.range
    U = sample_box(r + 1, samples, 1.0, seed)
    x0 = U[:, :1]
    steps = (2 * U[:, 1:] - 1) * k_cap
    pts = [np.hstack([x0, x0 + np.cumsum(steps, axis=1)])]
    corners = np.array(np.meshgrid(*([[-k_cap, k_cap]] * r), indexing="ij")).reshape(r, -1).T
    grid0 = np.linspace(0.0, 1.0, 257)[:-1]
    for c in corners:
        path = np.concatenate([[0.0], np.cumsum(c)])
        pts.append(grid0[:, None] + path[None, :])
    X = np.vstack(pts)
    G = pot.gradient(X)
    _check_finite(pot, X, G.sum(axis=1), "gradient")
    return LipschitzEstimate(float(k_cap), float(np.max(np.abs(G))), len(X), inflation, r)


@dataclass(frozen=True)
class EstimateConstants:
    """Constants of the barrier-difference estimate for rotation cap ``L``.

    ``E = 2 r^2``, ``K = L + 2 + 2E``, ``D`` the Lipschitz constant on X_K and
    ``C = 2 r D E``.
    """

    L: float
    r: int
    E: float
    K: float
    D: float
    lipschitz: LipschitzEstimate

    @property
    def C(self):
        return 2 * self.r * self.D * self.E

    def as_dict(self):
        return {"L": self.L, "r": self.r, "E": self.E, "K": self.K, "D": self.D,
                "D_raw": self.lipschitz.D_raw, "sup_partial": self.lipschitz.sup_partial,
                "samples": self.lipschitz.sample_count, "C": self.C}


def near_periodicity_constant(r: int) -> float:
    return 2.0 * r * r


def estimate_constants(pot: LocalPotential, L: float, samples=10_000, seed=0) -> EstimateConstants:
    if L <= 0:
        raise ValueError("L must be positive")
    r = pot.range
    E = near_periodicity_constant(r)
    K = L + 2 + 2 * E
    lip = lipschitz_constant(pot, K, samples=samples, seed=seed)
    return EstimateConstants(float(L), r, E, K, lip.D, lip)
