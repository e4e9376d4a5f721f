"""Exact rational and continued-fraction arithmetic for rotation numbers.

Rationals follow the ``(p, q)`` convention: the rotation number is ``q/p``
with ``p > 0``.  Irrational targets are carried exactly, either as quadratic
irrationals ``(A + B sqrt C) / den`` or as continued fractions with a periodic
tail, and the errors ``|p w - q|`` are certified with interval arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import mpmath
from mpmath import mp, mpf
from scipy import stats

WORK_BITS = 256
ENCLOSURE_BITS = 200  # deep convergents bracket the target to ~2^-200

# private interval context so the working precision is not shared global state
iv = type(mpmath.iv)()
iv.prec = WORK_BITS


class RationalTargetError(ValueError):
    """An operation that needs an irrational was given a rational."""


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class Rational:
    """Rotation number ``q/p`` in lowest terms with ``p > 0``."""

    p: int
    q: int

    def __post_init__(self):
        p, q = int(self.p), int(self.q)
        if p == 0:
            raise ValueError("denominator p must be nonzero")
        if p < 0:
            p, q = -p, -q
        g = math.gcd(p, q)
        object.__setattr__(self, "p", p // g)
        object.__setattr__(self, "q", q // g)

    @classmethod
    def parse(cls, text):
        """``"q/p"`` or an integer ``"q"``."""
        num, _, den = str(text).partition("/")
        return cls(int(den or 1), int(num))

    @property
    def fraction(self):
        return Fraction(self.q, self.p)

    def __float__(self):
        return self.q / self.p

    def __str__(self):
        return f"{self.q}/{self.p}"


def _squarefree(n):
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True)
class RotationTarget:
    """A rotation number: rational, quadratic irrational, or continued fraction."""

    kind: str
    rational: Optional[Rational] = None
    quad: Optional[tuple] = None      # (A, B, C, den): (A + B sqrt C) / den
    head: tuple = ()
    period: tuple = ()

    def __post_init__(self):
        if self.kind == "rational":
            if self.rational is None:
                raise ValueError("rational target needs a Rational")
        elif self.kind == "quadratic":
            A, B, C, den = self.quad
            if den == 0 or B == 0:
                raise ValueError("quadratic irrational needs den != 0 and B != 0")
            if not _squarefree(C):
                raise ValueError(f"C = {C} must be square-free and at least 2")
        elif self.kind == "cf":
            if not self.head and not self.period:
                raise ValueError("empty continued fraction")
            if any(a < 1 for a in tuple(self.head[1:]) + tuple(self.period)):
                raise ValueError("partial quotients after the first must be >= 1")
        else:
            raise ValueError(f"unknown rotation kind {self.kind!r}")

    @classmethod
    def from_rational(cls, p, q):
        return cls("rational", rational=Rational(p, q))

    @classmethod
    def quadratic(cls, A, B, C, den):
        return cls("quadratic", quad=(int(A), int(B), int(C), int(den)))

    @classmethod
    def continued_fraction(cls, head, period=()):
        head, period = tuple(int(a) for a in head), tuple(int(a) for a in period)
        if not period:
            # finite expansion: a rational
            h = Fraction(head[-1])
            for a in reversed(head[:-1]):
                h = a + 1 / h
            return cls.from_rational(h.denominator, h.numerator)
        return cls("cf", head=head, period=period)

    @property
    def is_irrational(self):
        return self.kind != "rational"

    def partial_quotients(self):
        """Infinite generator of continued-fraction coefficients."""
        if self.kind == "rational":
            raise RationalTargetError("rational target has a finite expansion")
        if self.kind == "cf":
            yield from self.head
            while True:
                yield from self.period
        else:
            yield from _quadratic_cf(*self.quad)

    def enclosure(self):
        """Interval containing the target, of width about ``2**-ENCLOSURE_BITS``."""
        if self.kind == "rational":
            f = self.rational.fraction
            return iv.mpf(f.numerator) / f.denominator
        if self.kind == "quadratic":
            A, B, C, den = self.quad
            return (A + B * iv.sqrt(iv.mpf(C))) / den
        (h0, k0), (h1, k1) = _deep_convergents(self.partial_quotients())
        a = iv.mpf(h0) / k0
        b = iv.mpf(h1) / k1
        return iv.mpf([min(a.a, b.a), max(a.b, b.b)])

    def __float__(self):
        e = self.enclosure()
        return float(e.mid)

    def descriptor(self):
        if self.kind == "rational":
            return {"kind": "rational", "p": self.rational.p, "q": self.rational.q}
        if self.kind == "quadratic":
            A, B, C, den = self.quad
            return {"kind": "quadratic", "num": [A, B, C], "den": den}
        return {"kind": "cf", "head": list(self.head), "period": list(self.period)}

    def __str__(self):
        if self.kind == "rational":
            return str(self.rational)
        if self.kind == "quadratic":
            A, B, C, den = self.quad
            return f"({A}{B:+d}*sqrt({C}))/{den}"
        return f"[{';'.join(map(str, self.head))}; ({','.join(map(str, self.period))})]"


GOLDEN_MEAN = RotationTarget.quadratic(1, 1, 5, 2)
SILVER_ROOT = RotationTarget.quadratic(0, 1, 2, 1)


def _quadratic_cf(A, B, C, den):
    """Exact partial quotients of ``(A + B sqrt C) / den``.

    Rewritten as ``(P + sqrt D) / Q`` with ``Q | D - P^2``; each step is
    integer arithmetic plus an integer square root.
    """
    s = 1 if B > 0 else -1
    P, Q, D = A * s, den * s, B * B * C
    if (D - P * P) % Q:
        P, Q, D = P * abs(Q), Q * abs(Q), D * Q * Q
    r = math.isqrt(D)
    while True:
        if Q > 0:
            a = (P + r) // Q
        else:
            a = -((P + r) // -Q + 1)
        yield a
        P = a * Q - P
        Q = (D - P * P) // Q


def _deep_convergents(terms):
    """Two consecutive convergents with ``k_n k_{n+1} > 2**ENCLOSURE_BITS``."""
    h2, h1, k2, k1 = 0, 1, 1, 0
    for a in terms:
        h2, h1 = h1, a * h1 + h2
        k2, k1 = k1, a * k1 + k2
        if k2 and k1 * k2 > 1 << ENCLOSURE_BITS:
            return (h2, k2), (h1, k1)


def parse_rotation(desc) -> RotationTarget:
    """Rotation descriptor: rational ``{"kind":"rational","p":..,"q":..}``,
    quadratic ``{"kind":"quadratic","num":[A,B,C],"den":d}`` or
    ``{"kind":"cf","head":[...],"period":[...]}``.
    """
    kind = desc.get("kind")
    if kind == "rational":
        return RotationTarget.from_rational(desc["p"], desc["q"])
    if kind == "quadratic":
        A, B, C = desc["num"]
        return RotationTarget.quadratic(A, B, C, desc["den"])
    if kind == "cf":
        return RotationTarget.continued_fraction(desc.get("head", ()), desc.get("period", ()))
    raise ValueError(f"unknown rotation kind {kind!r}")


@dataclass(frozen=True)
class Convergent:
    """A best rational approximation ``q/p`` and ``|p w - q|`` with its enclosure."""

    rational: Rational
    abs_err: float
    err_lo: float
    err_hi: float
    index: int

    @property
    def width(self):
        return self.err_hi - self.err_lo

    @property
    def p(self):
        return self.rational.p

    @property
    def q(self):
        return self.rational.q


def certified_error(omega: RotationTarget, p: int, q: int):
    """Enclosure of ``|p w - q|`` as ``(lo, hi, mid)`` floats."""
    e = abs(p * omega.enclosure() - q)
    lo, hi = float(e.a), float(e.b)
    # round the float endpoints outward so the enclosure stays valid
    if mpf(lo) > e.a:
        lo = math.nextafter(lo, -math.inf)
    if mpf(hi) < e.b:
        hi = math.nextafter(hi, math.inf)
    return lo, hi, float(e.mid)


def convergents(omega: RotationTarget, n: int):
    """First ``n`` continued-fraction convergents that are best approximations.

    ``a_0/1`` is skipped when ``a_1 = 1``: then ``(a_0 + 1)/1`` is closer and
    is the next convergent.
    """
    if not omega.is_irrational:
        raise RationalTargetError(f"{omega} is rational; use it directly")
    if n < 1:
        raise ValueError("n must be at least 1")
    out = []
    h2, h1, k2, k1 = 0, 1, 1, 0
    prev = None
    idx = 0
    for a in omega.partial_quotients():
        h2, h1 = h1, a * h1 + h2
        k2, k1 = k1, a * k1 + k2
        if prev is not None and prev[1] == k1:
            prev = None  # same denominator, the new one is closer
        if prev is not None:
            out.append(_convergent(omega, *prev, idx))
            idx += 1
            if len(out) == n:
                return out
        prev = (h1, k1)


def _convergent(omega, h, k, idx):
    lo, hi, mid = certified_error(omega, k, h)
    return Convergent(Rational(k, h), mid, lo, hi, idx)


@dataclass(frozen=True)
class DiophantineBound:
    """``gamma = min_{p <= p_max} p |p w - q|`` with ``tau = 1``.

    ``gamma_tail`` is the same minimum restricted to ``p >= sqrt(p_max)``,
    the asymptotic constant (``1/sqrt 5`` for the golden mean).
    """

    gamma: float
    tau: float
    argmin_p: int
    gamma_tail: float
    p_max: int


def diophantine_bound(omega: RotationTarget, p_max: int) -> DiophantineBound:
    """Diophantine constant of a quadratic irrational over ``1 <= p <= p_max``.

    ``p ||p w||`` is minimized over best approximations: between consecutive
    best denominators both factors are at least their value at the smaller one.
    """
    if not omega.is_irrational:
        raise RationalTargetError(f"{omega} is rational")
    if p_max < 1:
        raise ValueError("p_max must be positive")
    # a_0/1 and (a_0+1)/1 both compete at p = 1
    vals = []
    lo, hi, e0 = certified_error(omega, 1, 0)
    frac = e0 - math.floor(e0)
    vals.append((1, min(frac, 1 - frac)))
    cs = convergents(omega, 4 * max(2, p_max.bit_length()) + 4)
    for c in cs:
        if c.p > p_max:
            break
        vals.append((c.p, c.p * c.abs_err))
    p_best, gamma = min(vals, key=lambda t: t[1])
    tail = [v for p, v in vals if p * p >= p_max] or [vals[-1][1]]
    return DiophantineBound(gamma, 1.0, p_best, min(tail), p_max)


def scan_gamma(omega: RotationTarget, p_max: int) -> float:
    """Exhaustive ``min_{1<=p<=p_max} p ||p w||`` in extended precision (for checks)."""
    with mp.workprec(WORK_BITS):
        w = mpf(omega.enclosure().mid)
        best = mpf("inf")
        for p in range(1, p_max + 1):
            x = p * w
            d = abs(x - mp.nint(x))
            best = min(best, p * d)
        return float(best)


@dataclass(frozen=True)
class HolderData:
    """Log-log pairs ``(|W - w|, |P_W - P_w|)`` and their least-squares slope."""

    pairs: tuple
    slope: Optional[float]
    slope_err: Optional[float]
    intercept: Optional[float]
    degenerate: bool
    reason: str = ""


def holder_exponent_data(omega: RotationTarget, convs, values, limit=None) -> HolderData:
    """Pairs for the Hölder regression of barriers against rotation distance.

    ``values[i]`` is the barrier data at ``convs[i]`` (a scalar or a profile;
    profiles are compared in sup norm).  Without ``limit`` the last entry
    stands in for ``P_w`` and is not used as a pair.
    """
    if len(convs) != len(values):
        raise ValueError("one value per convergent is required")
    vals = [np.atleast_1d(np.asarray(v, dtype=float)) for v in values]
    if limit is None:
        limit, convs, vals = vals[-1], convs[:-1], vals[:-1]
    limit = np.atleast_1d(np.asarray(limit, dtype=float))
    if len(convs) < 3:
        raise InsufficientDataError(f"need at least 3 pairs, got {len(convs)}")
    pairs = tuple((c.abs_err / c.p, float(np.max(np.abs(v - limit)))) for c, v in zip(convs, vals))
    usable = [(dx, dy) for dx, dy in pairs if dx > 0 and dy > 0]
    if not usable or all(dy == 0 for _, dy in pairs):
        return HolderData(pairs, None, None, None, True, "all barrier differences vanish")
    if len(usable) < 3:
        return HolderData(pairs, None, None, None, True, "fewer than 3 nonzero differences")
    lx, ly = np.log([u[0] for u in usable]), np.log([u[1] for u in usable])
    fit = stats.linregress(lx, ly)
    return HolderData(pairs, float(fit.slope), float(fit.stderr), float(fit.intercept), False)
