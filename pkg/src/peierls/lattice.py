"""Periodic configurations, finite windows, translates and orderings."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np


class IncomparableError(ValueError):
    """Configurations with different rotation numbers cannot be compared."""


class NotBirkhoffError(ValueError):
    """Input that must be Birkhoff crosses one of its translates."""


class Order(enum.Enum):
    EQUAL = "equal"
    STRICT_LESS = "strict_less"
    WEAK_LESS = "weak_less"
    STRICT_GREATER = "strict_greater"
    WEAK_GREATER = "weak_greater"
    INCOMPARABLE = "incomparable"

    @property
    def le(self):
        return self in (Order.EQUAL, Order.STRICT_LESS, Order.WEAK_LESS)

    @property
    def ge(self):
        return self in (Order.EQUAL, Order.STRICT_GREATER, Order.WEAK_GREATER)


@dataclass(frozen=True, eq=False)
class PeriodicConfiguration:
    """A sequence with ``x_{i+p} = x_i + q`` stored by one period ``x_0..x_{p-1}``.

    ``(p, q)`` and ``(-p, -q)`` describe the same space; the period is
    normalized to be positive.
    """

    p: int
    q: int
    values: np.ndarray

    def __post_init__(self):
        p, q = int(self.p), int(self.q)
        if p == 0:
            raise ValueError("period p must be nonzero")
        v = np.array(self.values, dtype=float).reshape(-1)
        if p < 0:
            # same space, reindexed: x_{i-|p|} = x_i - q
            p, q = -p, -q
        if v.size != p:
            raise ValueError(f"expected {p} values, got {v.size}")
        v.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "values", v)

    @property
    def rotation(self):
        return self.q / self.p

    @property
    def xi(self):
        return float(self.values[0])

    def get(self, i):
        """Value at integer index (or integer array) ``i`` of the extension."""
        i = np.asarray(i)
        n, j = np.divmod(i, self.p)
        out = self.values[j] + n * self.q
        return float(out) if out.ndim == 0 else out

    def window(self, lo, hi):
        return Window(lo, hi, self.get(np.arange(lo, hi + 1)))

    def windows(self, r):
        """Array ``X[j, m] = x_{j+m}`` for ``j = 0..p-1``, ``m = 0..r``."""
        idx = np.arange(self.p)[:, None] + np.arange(r + 1)[None, :]
        return self.get(idx)

    def lift(self, n):
        """The same sequence viewed as an element of X_{np, nq}."""
        return PeriodicConfiguration(n * self.p, n * self.q, self.get(np.arange(n * self.p)))

    def with_values(self, values):
        return PeriodicConfiguration(self.p, self.q, values)

    def __add__(self, c):
        return PeriodicConfiguration(self.p, self.q, self.values + c)

    def __repr__(self):
        return f"PeriodicConfiguration(p={self.p}, q={self.q}, values={self.values!r})"


@dataclass(frozen=True, eq=False)
class Window:
    """Finite view ``x_lo..x_hi`` of a sequence."""

    lo: int
    hi: int
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if self.hi < self.lo:
            raise ValueError(f"empty window [{self.lo}, {self.hi}]")
        if v.size != self.hi - self.lo + 1:
            raise ValueError("window length does not match its index range")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.hi - self.lo + 1

    def __getitem__(self, i):
        return self.values[i - self.lo]


def translate(x: PeriodicConfiguration, k: int, l: int) -> PeriodicConfiguration:
    """``(tau_{k,l} x)_i = x_{i-k} + l``."""
    return PeriodicConfiguration(x.p, x.q, x.get(np.arange(x.p) - k) + l)


def _common_period(x, y):
    if x.q * y.p != y.q * x.p:
        raise IncomparableError(
            f"rotation numbers {x.q}/{x.p} and {y.q}/{y.p} differ")
    return x.p * y.p // math.gcd(x.p, y.p)


def compare(x: PeriodicConfiguration, y: PeriodicConfiguration, fuzz=0.0) -> Order:
    """Order relation of ``x`` relative to ``y`` on their common period.

    Differences of magnitude ``<= fuzz`` count as equal.
    """
    n = _common_period(x, y)
    idx = np.arange(n)
    d = x.get(idx) - y.get(idx)
    less = d < -fuzz
    greater = d > fuzz
    if not less.any() and not greater.any():
        return Order.EQUAL
    if less.any() and greater.any():
        return Order.INCOMPARABLE
    if less.any():
        return Order.STRICT_LESS if less.all() else Order.WEAK_LESS
    return Order.STRICT_GREATER if greater.all() else Order.WEAK_GREATER


def default_translate_box(x: PeriodicConfiguration):
    """Translate ranges that certify the Birkhoff property of a periodic x."""
    return x.p, math.ceil(abs(x.q) / x.p) * x.p + 1


def birkhoff_defect(x: PeriodicConfiguration, k_max=None, l_max=None) -> float:
    """Largest crossing between ``x`` and a translate ``tau_{k,l} x``.

    For each translate the crossing is the smaller of the largest positive
    and largest negative part of ``tau_{k,l} x - x``; zero means ordered.
    """
    dk, dl = default_translate_box(x)
    k_max = dk if k_max is None else k_max
    l_max = dl if l_max is None else l_max
    ks = np.arange(-k_max, k_max + 1)
    i = np.arange(x.p)
    base = x.get(i[None, :] - ks[:, None]) - x.values[None, :]
    hi = base.max(axis=1)
    lo = base.min(axis=1)
    ls = np.arange(-l_max, l_max + 1)
    pos = np.maximum(0.0, hi[:, None] + ls[None, :])
    neg = np.maximum(0.0, -(lo[:, None] + ls[None, :]))
    return float(np.max(np.minimum(pos, neg)))


def rotation_number_estimate(w: Window) -> float:
    if len(w) < 2:
        raise ValueError("need at least two sites")
    return (w.values[-1] - w.values[0]) / (w.hi - w.lo)


def hull_function_samples(x: PeriodicConfiguration, fuzz=1e-8):
    """Samples ``(k q/p + l, x_k + l)`` of the hull function on ``[0, 1)``.

    Arguments are reduced mod 1; values carry the same integer shift, moved
    as a whole so that the sample at argument 0 lies in ``[0, 1)``.  The
    returned array has shape ``(p, 2)`` sorted by argument, ties by value.
    """
    if math.gcd(x.p, x.q) != 1:
        raise ValueError(f"(p, q) = ({x.p}, {x.q}) is not coprime")
    if birkhoff_defect(x) > fuzz:
        raise NotBirkhoffError("hull function needs a Birkhoff configuration")
    k = np.arange(x.p)
    shift = -np.floor_divide(k * x.q, x.p)
    args = (k * x.q + shift * x.p) / x.p
    vals = x.values + shift - math.floor(x.values[0])
    order = np.lexsort((vals, args))
    return np.column_stack([args[order], vals[order]])


def write_window_csv(path, w: Window):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["index", "value"])
        for i, v in zip(range(w.lo, w.hi + 1), w.values):
            out.writerow([i, f"{v:.12e}"])


def write_hull_csv(path, samples):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["arg", "value"])
        for a, v in samples:
            out.writerow([f"{a:.12e}", f"{v:.12e}"])
