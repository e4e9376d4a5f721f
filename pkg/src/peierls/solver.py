"""Periodic minimizers, constrained minimizers and neighbouring minimizer pairs."""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .action import periodic_action
from .lattice import PeriodicConfiguration, birkhoff_defect, translate
from .potential import EvaluationDomainError, LocalPotential


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10
    max_iters: int = 500
    starts: int = 8
    fuzz: float = 1e-8

    def __post_init__(self):
        if self.tol <= 0 or self.fuzz < 0:
            raise ValueError("tol must be positive and fuzz nonnegative")
        if self.max_iters < 1 or self.starts < 1:
            raise ValueError("max_iters and starts must be at least 1")

    @classmethod
    def from_dict(cls, d):
        return cls(**(d or {}))

    def as_dict(self):
        return {"tol": self.tol, "max_iters": self.max_iters, "starts": self.starts,
                "fuzz": self.fuzz}


DEFAULT_OPTIONS = SolverOptions()


class ConvergenceError(RuntimeError):
    """No start reached the residual tolerance; ``best`` holds the best iterate."""

    def __init__(self, msg, best=None, p=None, q=None, xi=None):
        super().__init__(msg)
        self.best, self.p, self.q, self.xi = best, p, q, xi


@dataclass(frozen=True)
class MinimizerResult:
    configuration: PeriodicConfiguration
    action: float
    residual_norm: float
    starts_used: int
    birkhoff_defect: float
    converged: bool = True
    xi: float = None
    sandwich_violation: float = 0.0

    @property
    def values(self):
        return self.configuration.values


@dataclass(frozen=True)
class NeighborPair:
    lower: MinimizerResult
    upper: MinimizerResult
    gap_l1: float
    degenerate: bool = False


def _check_action(f, v):
    if not math.isfinite(f):
        raise EvaluationDomainError(v)


def _solve(pot, v0, p, q, fixed0, opts):
    v, f, gn, it, ok = kernels.newton_minimize(pot, v0, p, q, fixed0=fixed0, tol=opts.tol,
                                               max_iters=opts.max_iters)
    _check_action(f, v)
    return v, f, gn, ok


def _canonical(x: PeriodicConfiguration) -> PeriodicConfiguration:
    """Orbit representative whose ``x_0`` is the smallest fractional part, placed in [0, 1)."""
    frac = x.values - np.floor(x.values)
    j = int(np.argmin(frac))
    return translate(x, -j, -math.floor(x.values[j]))


def periodic_starts(p, q, count):
    """Linear sequences ``c + i q/p`` and staircases ``floor(c + i q/p)`` for ``c`` in ``[0, 1/p)``."""
    i = np.arange(p)
    slope = i * q / p
    out = []
    for k in range(count):
        c = k / (count * p)
        out.append(c + slope)
    for k in range(count):
        c = (k + 0.5) / (count * p)
        out.append(np.floor(c + slope + 0.5 / p))
    return out


def _tie(f, g):
    return abs(f - g) <= 1e-12 * max(1.0, abs(f), abs(g))


def _minimize_reduced(pot, p, q, opts, extra_starts=()):
    starts = periodic_starts(p, q, opts.starts) + [np.asarray(s, dtype=float) for s in extra_starts]
    found = []
    best_fail = None
    for v0 in starts:
        v, f, gn, ok = _solve(pot, v0, p, q, False, opts)
        if ok:
            found.append((f, _canonical(PeriodicConfiguration(p, q, v)), gn))
        elif best_fail is None or f < best_fail[0]:
            best_fail = (f, v, gn)
    if not found:
        f, v, gn = best_fail
        best = MinimizerResult(PeriodicConfiguration(p, q, v), f, gn, len(starts),
                               birkhoff_defect(PeriodicConfiguration(p, q, v)), converged=False)
        raise ConvergenceError(f"no start converged for (p, q) = ({p}, {q})", best, p, q)
    fmin = min(f for f, _, _ in found)
    ties = [(x, gn) for f, x, gn in found if _tie(f, fmin)]
    # deterministic reduction: smallest x_0, then lexicographic
    x, gn = min(ties, key=lambda t: (round(t[0].values[0], 12), tuple(np.round(t[0].values, 12))))
    f = min(f for f, y, _ in found if y is x)
    return MinimizerResult(x, f, gn, len(starts), birkhoff_defect(x))


@functools.lru_cache(maxsize=512)
def _cached_periodic(pot, p, q, opts, backend):
    return _minimize_reduced(pot, p, q, opts)


def minimize_periodic(pot: LocalPotential, p: int, q: int, opts: SolverOptions = DEFAULT_OPTIONS,
                      extra_starts=()) -> MinimizerResult:
    """Best minimizer of ``W_{p,q}`` over a multi-start sweep.

    Non-reduced ``(p, q)`` is solved at ``(p/g, q/g)`` and lifted back.
    """
    if p == 0:
        raise ValueError("p must be nonzero")
    if p < 0:
        p, q = -p, -q
    g = math.gcd(p, q)
    if g > 1:
        warnings.warn(f"(p, q) = ({p}, {q}) reduced to ({p // g}, {q // g})", stacklevel=2)
        base = minimize_periodic(pot, p // g, q // g, opts)
        x = base.configuration.lift(g)
        return MinimizerResult(x, g * base.action, base.residual_norm, base.starts_used,
                               base.birkhoff_defect)
    if extra_starts:
        return _minimize_reduced(pot, p, q, opts, extra_starts)
    try:
        key = (pot, p, q, opts, kernels.BACKEND)
        if key in _improved:
            return _improved[key]
        return _cached_periodic(*key)
    except TypeError:  # unhashable potential
        return _minimize_reduced(pot, p, q, opts)


# better minimizers found after the fact (e.g. by a constrained solve)
_improved = {}


def improve_periodic(pot, p, q, candidate, opts: SolverOptions = DEFAULT_OPTIONS):
    """Re-run the sweep with ``candidate`` and twice the starts; remember a better result."""
    dense = SolverOptions(opts.tol, opts.max_iters, 2 * opts.starts, opts.fuzz)
    old = minimize_periodic(pot, p, q, opts)
    new = _minimize_reduced(pot, p, q, dense, [np.asarray(candidate, dtype=float)])
    if new.action < old.action:
        try:
            _improved[(pot, p, q, opts, kernels.BACKEND)] = new
        except TypeError:
            pass
        return new
    return old


def clear_cache():
    _cached_periodic.cache_clear()
    _improved.clear()


def _orbit_neighbors(x: PeriodicConfiguration, xi: float):
    """Translates of ``x`` with the largest ``x_0 <= xi`` and the smallest ``x_0 >= xi``.

    The translates of a Birkhoff orbit are totally ordered, and the one
    starting at site ``j`` shifted by ``l`` has period mean
    ``mean(x) + (j q + l p) / p``; ranking by the integer ``j q + l p`` avoids
    comparing the near-coincident ``x_0`` values of a pinned orbit.
    """
    v = x.values
    j = np.arange(x.p)
    lo_l = np.floor(xi - v).astype(np.int64)
    hi_l = np.ceil(xi - v).astype(np.int64)
    jl = int(np.argmax(j * x.q + lo_l * x.p))
    ju = int(np.argmin(j * x.q + hi_l * x.p))
    lower = translate(x, -jl, int(lo_l[jl]))
    upper = translate(x, -ju, int(hi_l[ju]))
    return lower, upper


def _require_coprime(p, q):
    if p == 0 or math.gcd(p, q) != 1:
        raise ValueError(f"(p, q) = ({p}, {q}) must be coprime")


def _as_result(pot, x, base, gn=0.0):
    return MinimizerResult(x, base.action, max(gn, base.residual_norm), base.starts_used,
                           base.birkhoff_defect)


def _orbit_pair(pot, p, q, xi, opts):
    """Best periodic minimizer and its orbit neighbours around ``xi``.

    When a translate has ``x_0`` within fuzz of ``xi`` both neighbours are
    that translate (the constraint is inactive).
    """
    base = minimize_periodic(pot, p, q, opts)
    lower, upper = _orbit_neighbors(base.configuration, xi)
    for cand in (lower, upper):
        if abs(cand.values[0] - xi) <= opts.fuzz:
            r = _as_result(pot, cand, base)
            return base, r, r, True
    return base, _as_result(pot, lower, base), _as_result(pot, upper, base), False


def _sandwich_violation(x, lower, upper):
    below = np.max(lower.values - x.values)
    above = np.max(x.values - upper.values)
    return float(max(0.0, below, above))


def minimize_constrained(pot: LocalPotential, p: int, q: int, xi: float,
                         opts: SolverOptions = DEFAULT_OPTIONS) -> MinimizerResult:
    """Minimizer of ``W_{p,q}`` subject to ``x_0 = xi``.

    Starts are built from the two orbit neighbours of the best periodic
    minimizer, which sandwich every constrained minimizer.
    """
    if p < 0:
        p, q = -p, -q
    _require_coprime(p, q)
    xi = float(xi)
    base, lower, upper, degenerate = _orbit_pair(pot, p, q, xi, opts)
    lv, uv = lower.values, upper.values
    if degenerate:
        starts = [lv.copy()]
    else:
        t = (xi - lv[0]) / (uv[0] - lv[0])
        starts = [(1 - t) * lv + t * uv, lv.copy(), uv.copy(), 0.5 * (lv + uv)]
    for s in starts:
        s[0] = xi
    best = None
    for v0 in starts:
        v, f, gn, ok = _solve(pot, v0, p, q, True, opts)
        v[0] = xi
        if best is None or (ok and not best[3]) or (ok == best[3] and f < best[1]):
            best = (v, f, gn, ok)
    v, f, gn, ok = best
    x = PeriodicConfiguration(p, q, v)
    res = MinimizerResult(x, f, gn, len(starts), birkhoff_defect(x), converged=ok, xi=xi,
                          sandwich_violation=_sandwich_violation(x, lower.configuration,
                                                                 upper.configuration))
    if not ok:
        raise ConvergenceError(f"constrained solve failed for (p, q) = ({p}, {q}), xi = {xi}",
                               res, p, q, xi)
    return res


def gap_l1(lower: PeriodicConfiguration, upper: PeriodicConfiguration) -> float:
    return float(np.sum(np.abs(upper.values - lower.values)))


def neighbor_pair(pot: LocalPotential, p: int, q: int, xi: float,
                  opts: SolverOptions = DEFAULT_OPTIONS) -> NeighborPair:
    """Adjacent periodic minimizers ``x^- <= x^+`` with ``x^-_0 <= xi <= x^+_0``.

    The pair is degenerate (``lower is upper``) when some minimizer passes
    through ``xi``: either an orbit translate within fuzz, or a constrained
    minimizer whose action matches the unconstrained minimum.
    """
    if p < 0:
        p, q = -p, -q
    _require_coprime(p, q)
    base, lower, upper, degenerate = _orbit_pair(pot, p, q, xi, opts)
    if degenerate:
        return NeighborPair(lower, upper, 0.0, True)
    con = minimize_constrained(pot, p, q, xi, opts)
    if con.action - base.action <= 1e-9 * max(1.0, abs(base.action)):
        return NeighborPair(con, con, 0.0, True)
    return NeighborPair(lower, upper, gap_l1(lower.configuration, upper.configuration), False)


def minmax_combine(x: PeriodicConfiguration, y: PeriodicConfiguration):
    """Pointwise ``(min(x, y), max(x, y))``."""
    if (x.p, x.q) != (y.p, y.q):
        raise ValueError("configurations must share (p, q)")
    return (PeriodicConfiguration(x.p, x.q, np.minimum(x.values, y.values)),
            PeriodicConfiguration(x.p, x.q, np.maximum(x.values, y.values)))


def minmax_slack(pot: LocalPotential, x, y) -> float:
    """``W(x) + W(y) - W(m) - W(M)``; nonnegative for monotone potentials."""
    m, M = minmax_combine(x, y)
    return (periodic_action(pot, x).value + periodic_action(pot, y).value
            - periodic_action(pot, m).value - periodic_action(pot, M).value)
