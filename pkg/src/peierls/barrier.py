"""Peierls barriers, their limits along convergents, and the checks built on them."""

from __future__ import annotations

import functools
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .action import EstimateConstants, estimate_constants, near_periodicity_constant
from .diophantine import Convergent, Rational, RotationTarget, convergents
from .lattice import NotBirkhoffError, PeriodicConfiguration, birkhoff_defect
from .potential import LocalPotential, PerturbedPotential, check_conditions
from .solver import (DEFAULT_OPTIONS, ConvergenceError, SolverOptions, improve_periodic,
                     minimize_constrained, minimize_periodic)

log = logging.getLogger(__name__)

CLAMP = 1e-9          # negative barriers above -CLAMP are roundoff
ESTIMATE_SLACK = 1e-8
NOISE_FLOOR = 1e-11   # sup-differences below this are solver/roundoff noise
EMPIRICAL_RHO_MAX = 0.9


def _as_rational(rotation):
    if isinstance(rotation, Rational):
        return rotation
    if isinstance(rotation, RotationTarget):
        if rotation.is_irrational:
            raise ValueError(f"{rotation} is irrational")
        return rotation.rational
    p, q = rotation
    return Rational(p, q)


def _clamp(value, p, q, xi):
    if value < 0:
        if value <= -CLAMP:
            raise ValueError(f"barrier {value:.3e} < 0 at (p, q, xi) = ({p}, {q}, {xi})")
        log.debug("clamped barrier %.3e to 0 at (%d, %d, %.6f)", value, p, q, xi)
        return 0.0
    return value


def barrier_rational(pot: LocalPotential, rotation, xi: float,
                     opts: SolverOptions = DEFAULT_OPTIONS) -> float:
    """``P_{q/p}(xi)``: constrained minimum minus unconstrained minimum of ``W_{p,q}``."""
    r = _as_rational(rotation)
    try:
        con = minimize_constrained(pot, r.p, r.q, xi, opts)
    except ConvergenceError as exc:
        exc.p, exc.q, exc.xi = r.p, r.q, xi
        raise
    base = minimize_periodic(pot, r.p, r.q, opts)
    value = con.action - base.action
    if value <= -CLAMP:
        base = improve_periodic(pot, r.p, r.q, con.values, opts)
        con = minimize_constrained(pot, r.p, r.q, xi, opts)
        value = con.action - base.action
    return _clamp(value, r.p, r.q, xi)


@dataclass(frozen=True)
class BarrierProfile:
    """Barrier values on the uniform grid ``xi_k = k / N``."""

    rotation: Rational
    grid: np.ndarray
    values: np.ndarray
    minimizer: object = None
    failed: tuple = ()
    max_birkhoff_defect: float = 0.0
    max_sandwich_violation: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def sup(self):
        v = self.values[np.isfinite(self.values)]
        return float(np.max(v)) if v.size else float("nan")

    @property
    def argmax(self):
        return float(self.grid[int(np.nanargmax(self.values))])

    @property
    def partial(self):
        return bool(self.failed)


_default_threads = None


def set_threads(n):
    """Worker count for profile evaluation; results do not depend on it."""
    global _default_threads
    _default_threads = n


def _threads(threads):
    return threads or _default_threads or min(8, os.cpu_count() or 1)


def _profile_points(pot, r, grid, opts, threads):
    def one(xi):
        try:
            return minimize_constrained(pot, r.p, r.q, xi, opts)
        except ConvergenceError as exc:
            return exc
    if threads == 1:
        return [one(xi) for xi in grid]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(one, grid))


def _compute_profile(pot, r, grid_size, opts, threads):
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    grid = np.arange(grid_size) / grid_size
    minimize_periodic(pot, r.p, r.q, opts)  # warm the cache before fanning out
    cons = _profile_points(pot, r, grid, opts, threads)
    base = minimize_periodic(pot, r.p, r.q, opts)
    ok = [c for c in cons if not isinstance(c, Exception)]
    worst = min(ok, key=lambda c: c.action, default=None)
    if worst is not None and worst.action - base.action <= -CLAMP:
        # a constrained solve undercut the periodic sweep: the sweep missed a basin
        improve_periodic(pot, r.p, r.q, worst.values, opts)
        cons = _profile_points(pot, r, grid, opts, threads)
        base = minimize_periodic(pot, r.p, r.q, opts)
    values = np.full(grid_size, np.nan)
    failed = []
    defects, sandwich = [base.birkhoff_defect], [0.0]
    for k, c in enumerate(cons):
        if isinstance(c, Exception):
            failed.append(k)
            continue
        values[k] = _clamp(c.action - base.action, r.p, r.q, grid[k])
        defects.append(c.birkhoff_defect)
        sandwich.append(c.sandwich_violation)
    meta = {"solver": opts.as_dict(), "backend": kernels.BACKEND, "grid_size": grid_size}
    return BarrierProfile(r, grid, values, base, tuple(failed), float(max(defects)),
                          float(max(sandwich)), meta)


@functools.lru_cache(maxsize=256)
def _cached_profile(pot, r, grid_size, opts, backend):
    return _compute_profile(pot, r, grid_size, opts, _threads(None))


def barrier_profile(pot: LocalPotential, rotation, grid_size: int = 128,
                    opts: SolverOptions = DEFAULT_OPTIONS, threads=None) -> BarrierProfile:
    """``P_{q/p}`` on ``k/N``, ``k = 0..N-1``; grid points run in parallel."""
    r = _as_rational(rotation)
    try:
        return _cached_profile(pot, r, grid_size, opts, kernels.BACKEND)
    except TypeError:  # unhashable potential
        return _compute_profile(pot, r, grid_size, opts, _threads(threads))


def clear_cache():
    _cached_profile.cache_clear()


def default_cap(rotations):
    """Smallest integer ``L >= 1`` bounding all rotation numbers in magnitude."""
    return max(1, math.ceil(max(abs(float(r)) for r in rotations)))


def estimate_rhs(C, r1: Rational, r2: Rational):
    """``C (1/p + |p Q/P - q|)``, taking the sharper of the two orderings."""
    def side(a, b):
        return 1.0 / a.p + abs(a.p * b.q / b.p - a.q)
    return C * min(side(r1, r2), side(r2, r1))


def sup_difference(a: BarrierProfile, b: BarrierProfile) -> float:
    if a.grid.shape != b.grid.shape:
        raise ValueError("profiles must share a grid")
    return float(np.nanmax(np.abs(a.values - b.values)))


@dataclass
class LimitReport:
    """Profiles along convergents of an irrational and the limit they define."""

    omega: RotationTarget
    convergents: list
    profiles: list
    constants: EstimateConstants
    pairs: list
    extrapolated: np.ndarray
    rigorous_error_bar: float
    empirical_error_bar: float
    cauchy: bool
    shrink_factor: float
    status: list

    @property
    def sup(self):
        return float(np.nanmax(self.extrapolated))

    def as_dict(self):
        return {
            "omega": str(self.omega),
            "convergents": [{"p": c.p, "q": c.q, "abs_err": c.abs_err, "sup": pr.sup,
                             "status": st}
                            for c, pr, st in zip(self.convergents, self.profiles, self.status)],
            "pairs": self.pairs,
            "sup": self.sup,
            "rigorous_error_bar": self.rigorous_error_bar,
            "empirical_error_bar": self.empirical_error_bar,
            "cauchy": self.cauchy,
            "shrink_factor": self.shrink_factor,
            "constants": self.constants.as_dict(),
        }


def empirical_error_bar(diffs, fallback):
    """Tail bound for ``|P_w - P_last|`` from successive sup-differences.

    Fits a geometric rate to the last (up to three) ratios above the noise
    floor; a rate of 0.9 or more is not trusted and ``fallback`` is used.
    """
    if not diffs:
        return fallback
    d = diffs[-1]
    if d <= NOISE_FLOOR:
        return NOISE_FLOOR
    above = [x for x in diffs if x > NOISE_FLOOR]
    ratios = [b / a for a, b in zip(above[:-1], above[1:])][-3:]
    if not ratios:
        return fallback
    rho = float(np.exp(np.mean(np.log(ratios))))
    if rho >= EMPIRICAL_RHO_MAX:
        return fallback
    return max(d, d * rho / (1 - rho))


def _shrink_factor(diffs):
    """Geometric-mean ratio ``d_k / d_{k+1}`` over differences above the noise floor."""
    above = [x for x in diffs if x > NOISE_FLOOR]
    if len(above) < 2:
        return float("inf")
    return float((above[0] / above[-1]) ** (1.0 / (len(above) - 1)))


def barrier_irrational(pot: LocalPotential, omega: RotationTarget, n_convergents: int = 12,
                       grid_size: int = 128, opts: SolverOptions = DEFAULT_OPTIONS,
                       L=None, constants: EstimateConstants = None, c_scale=1.0,
                       seed=0) -> LimitReport:
    """Barrier profiles at the first ``n_convergents`` convergents of ``omega``."""
    if n_convergents < 3:
        raise ValueError("need at least 3 convergents")
    convs = convergents(omega, n_convergents)
    if L is None:
        L = default_cap([c.rational for c in convs] + [omega])
    if constants is None:
        constants = estimate_constants(pot, L, seed=seed)
    C = constants.C * c_scale
    profiles, status = [], []
    for c in convs:
        try:
            pr = barrier_profile(pot, c.rational, grid_size, opts)
            status.append("partial" if pr.partial else "ok")
        except ConvergenceError as exc:
            raise ConvergenceError(f"convergent {c.rational}: {exc}", exc.best, c.p, c.q,
                                   exc.xi) from exc
        profiles.append(pr)
    pairs, diffs = [], []
    cauchy = True
    for (c1, p1), (c2, p2) in zip(zip(convs, profiles), zip(convs[1:], profiles[1:])):
        lhs = sup_difference(p1, p2)
        rhs = C * (1.0 / c1.p + abs(c1.p * c2.q / c2.p - c1.q))
        cauchy_rhs = 3 * C / c1.p
        diffs.append(lhs)
        ok = lhs <= rhs + ESTIMATE_SLACK and lhs <= cauchy_rhs + ESTIMATE_SLACK
        cauchy &= ok
        pairs.append({"from": str(c1.rational), "to": str(c2.rational), "lhs": lhs,
                      "rhs": rhs, "cauchy_rhs": cauchy_rhs, "pass": bool(ok)})
    last = convs[-1]
    rigorous = C * (1.0 / last.p + last.abs_err)
    return LimitReport(omega, convs, profiles, constants, pairs, profiles[-1].values.copy(),
                       rigorous, empirical_error_bar(diffs, rigorous), cauchy,
                       _shrink_factor(diffs), status)


@dataclass(frozen=True)
class EstimateReport:
    """One asserted inequality ``lhs <= rhs``."""

    check: str
    lhs: float
    rhs: float
    passed: bool
    detail: dict = field(default_factory=dict)

    @property
    def slack(self):
        return self.rhs - self.lhs

    def as_dict(self):
        return {"check": self.check, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "pass": self.passed, **self.detail}


@dataclass(frozen=True)
class NearPeriodicity:
    defect: float
    i0: int
    bound: float

    @property
    def passed(self):
        return self.defect <= self.bound


def near_periodicity_defect(x: PeriodicConfiguration, p: int, q: int, r: int,
                            fuzz=1e-8) -> NearPeriodicity:
    """``min_{-p < i0 <= 0} sum_{j=i0}^{i0+r-1} |x_{j+p} - q - x_j|`` and its bound.

    ``x`` has rotation ``Q/P``; the bound is ``E (1/p + |p Q/P - q|)`` with
    ``E = 2 r^2``.
    """
    if p < 0:
        p, q = -p, -q
    if p == 0 or math.gcd(p, q) != 1 or math.gcd(x.p, x.q) != 1:
        raise ValueError("both rotation numbers must be reduced")
    if birkhoff_defect(x) > fuzz:
        raise NotBirkhoffError("near-periodicity needs a Birkhoff configuration")
    j = np.arange(-p + 1, r)
    d = np.abs(x.get(j + p) - q - x.get(j))
    sums = np.convolve(d, np.ones(r), mode="valid")   # sums[k] starts at j = -p + 1 + k
    k = int(np.argmin(sums))
    bound = near_periodicity_constant(r) * (1.0 / p + abs(p * x.q / x.p - q))
    return NearPeriodicity(float(sums[k]), -p + 1 + k, bound)


def verify_difference_estimate(pot: LocalPotential, pairs, L=None, grid_size: int = 128,
                               c_scale: float = 1.0, opts: SolverOptions = DEFAULT_OPTIONS,
                               constants: EstimateConstants = None, seed=0):
    """Check ``sup |P_{Q/P} - P_{q/p}| <= C (1/p + |p Q/P - q|)`` on each pair.

    Each pair also gets the near-periodicity check of the larger-period
    minimizer against the smaller rotation.
    """
    pairs = [(_as_rational(a), _as_rational(b)) for a, b in pairs]
    if L is None:
        L = default_cap([r for pr in pairs for r in pr])
    if any(abs(float(r)) > L for pr in pairs for r in pr):
        raise ValueError(f"rotation numbers must be bounded by L = {L}")
    if constants is None:
        constants = estimate_constants(pot, L, seed=seed)
    C = constants.C * c_scale
    out = []
    for a, b in pairs:
        pa = barrier_profile(pot, a, grid_size, opts)
        pb = barrier_profile(pot, b, grid_size, opts)
        lhs = sup_difference(pa, pb)
        rhs = estimate_rhs(C, a, b)
        small, big = (a, pb) if a.p <= b.p else (b, pa)
        npd = near_periodicity_defect(big.minimizer.configuration, small.p, small.q, pot.range)
        detail = {"pair": [str(a), str(b)], "C": C,
                  "near_periodicity": {"defect": npd.defect, "i0": npd.i0, "bound": npd.bound,
                                       "pass": npd.passed}}
        out.append(EstimateReport("fundamental_estimate", lhs, rhs,
                                  bool(lhs <= rhs + ESTIMATE_SLACK and npd.passed), detail))
    return out


@dataclass
class ClassificationResult:
    verdict: str
    sup_barrier: float
    threshold: float
    error_bar: float
    error_bar_kind: str
    rigorous_error_bar: float = 0.0
    report: Optional[object] = None

    def as_dict(self):
        d = {"verdict": self.verdict, "sup_barrier": self.sup_barrier,
             "threshold": self.threshold, "error_bar": self.error_bar,
             "error_bar_kind": self.error_bar_kind,
             "rigorous_error_bar": self.rigorous_error_bar}
        if isinstance(self.report, LimitReport):
            d["limit"] = self.report.as_dict()
        return d


def _verdict(sup, bar, threshold):
    if sup + bar < threshold:
        return "foliation"
    if sup - bar > threshold:
        return "lamination"
    return "inconclusive"


def classify(pot: LocalPotential, rotation, grid_size: int = 128, threshold: float = 1e-6,
             n_convergents: int = 12, opts: SolverOptions = DEFAULT_OPTIONS,
             error_bar: str = "empirical", c_scale: float = 1.0, seed=0) -> ClassificationResult:
    """Foliation, lamination or inconclusive, from the sup of the barrier.

    For irrational rotation the sup of the last convergent profile is used
    with an error bar: ``"rigorous"`` is ``C (1/p + |p w - q|)``,
    ``"empirical"`` extrapolates the observed convergence of the profiles.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if error_bar not in ("empirical", "rigorous"):
        raise ValueError("error_bar must be 'empirical' or 'rigorous'")
    if isinstance(rotation, RotationTarget) and rotation.is_irrational:
        rep = barrier_irrational(pot, rotation, n_convergents, grid_size, opts, c_scale=c_scale,
                                 seed=seed)
        bar = rep.empirical_error_bar if error_bar == "empirical" else rep.rigorous_error_bar
        return ClassificationResult(_verdict(rep.sup, bar, threshold), rep.sup, threshold, bar,
                                    error_bar, rep.rigorous_error_bar, rep)
    pr = barrier_profile(pot, rotation, grid_size, opts)
    return ClassificationResult(_verdict(pr.sup, 0.0, threshold), pr.sup, threshold, 0.0,
                                "exact", 0.0, pr)


@dataclass(frozen=True)
class RobustnessRow:
    delta: float
    rotation: Rational
    difference: float
    bound: float
    bound_scaled: float
    conditions_ok: bool
    passed: bool

    def as_dict(self):
        return {"delta": self.delta, "rotation": str(self.rotation),
                "difference": self.difference, "bound": self.bound,
                "bound_scaled": self.bound_scaled, "conditions_ok": self.conditions_ok,
                "pass": self.passed}


def robustness_sweep(pot: LocalPotential, bump: LocalPotential, deltas, rotation,
                     grid_size: int = 128, n_convergents: int = 12,
                     opts: SolverOptions = DEFAULT_OPTIONS, condition_samples=2000):
    """Barrier change under ``S + delta * bump`` against ``2 |P| delta``.

    For an irrational rotation every convergent is tested.  Rows whose
    perturbed potential fails the condition check are flagged, not fatal.
    """
    if isinstance(rotation, RotationTarget) and rotation.is_irrational:
        rats = [c.rational for c in convergents(rotation, n_convergents)]
    else:
        rats = [_as_rational(rotation)]
    sup_bump = bump.sup_norm() if hasattr(bump, "sup_norm") else 1.0
    rows = []
    for delta in deltas:
        pert = PerturbedPotential(pot, float(delta), bump)
        cond = check_conditions(pert, sample_count=condition_samples).passed
        for r in rats:
            diff = sup_difference(barrier_profile(pot, r, grid_size, opts),
                                  barrier_profile(pert, r, grid_size, opts))
            bound = 2 * r.p * abs(delta)
            rows.append(RobustnessRow(float(delta), r, diff, bound, bound * sup_bump, cond,
                                      bool(cond and diff <= bound + ESTIMATE_SLACK)))
    return rows
