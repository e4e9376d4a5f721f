"""The full set of inequality checks run by ``peierls verify``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .action import estimate_constants, periodic_action, segment_action
from .barrier import (EstimateReport, barrier_profile, near_periodicity_defect,
                      robustness_sweep, verify_difference_estimate)
from .diophantine import GOLDEN_MEAN, Rational, convergents
from .lattice import PeriodicConfiguration, Window
from .potential import CosineSeries, OnsitePotential
from .solver import DEFAULT_OPTIONS, minmax_slack, neighbor_pair

ROUNDOFF = 1e-9
GAP_SLACK = 1e-6
AUBRY_FUZZ = 1e-8

_extra = ["0/1", "1/1"], ["0/1", "1/2"], ["1/2", "8/13"], ["1/2", "1/3"], ["1/3", "2/5"], \
    ["2/5", "3/8"], ["0/1", "1/89"], ["0/1", "1/233"], ["1/1", "2/1"], ["1/2", "117/233"]


def standard_pairs():
    """Twenty rational pairs with ``|w| <= 2`` and denominators up to 233."""
    chain = [c.rational for c in convergents(GOLDEN_MEAN, 11)]
    pairs = [(Rational.parse(a), Rational.parse(b)) for a, b in _extra]
    return pairs + list(zip(chain[:-1], chain[1:]))


@dataclass(frozen=True)
class BatterySettings:
    L: float = 2.0
    grid: int = 128
    c_scale: float = 1.0
    seed: int = 0
    lipschitz_pairs: int = 1000
    max_segment: int = 50
    minmax_pairs: int = 1000
    gap_points: int = 32
    gap_max_p: int = 34
    chain_length: int = 11
    deltas: tuple = (1e-4, 1e-3)
    robustness_rotation: str = "1/2"
    lipschitz_samples: int = 10_000


def _aggregate(name, lhs, rhs, slack=0.0, **detail):
    """Worst case of many ``lhs_i <= rhs_i + slack`` as one report."""
    lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
    k = int(np.argmin(rhs + slack - lhs))
    fails = int(np.sum(lhs > rhs + slack))
    return EstimateReport(name, float(lhs[k]), float(rhs[k] + slack), fails == 0,
                          {"samples": int(lhs.size), "failures": fails, **detail})


def check_lipschitz(pot, consts, rng, n_pairs=1000, max_segment=50):
    """``|W(x) - W(y)| <= D sum |x_i - y_i|`` on random segments in X_K."""
    r, K, D = pot.range, consts.K, consts.D
    lhs, rhs = [], []
    for _ in range(n_pairs):
        n = int(rng.integers(1, max_segment + 1))
        length = n + r
        pts = []
        for _ in range(2):
            steps = rng.uniform(-K, K, length - 1)
            pts.append(rng.uniform(-2, 2) + np.concatenate([[0.0], np.cumsum(steps)]))
        x, y = pts
        i0 = int(rng.integers(-100, 100))
        wx = segment_action(pot, Window(i0, i0 + length - 1, x)).value
        wy = segment_action(pot, Window(i0, i0 + length - 1, y)).value
        lhs.append(abs(wx - wy))
        rhs.append(D * np.sum(np.abs(x - y)))
    return _aggregate("lipschitz", lhs, rhs, ROUNDOFF, D=D, K=K)


def check_minmax(pot, rng, n_pairs=1000):
    """``W(M) + W(m) <= W(x) + W(y)`` for random periodic pairs."""
    lhs, rhs = [], []
    for _ in range(n_pairs):
        p = int(rng.integers(1, 21))
        q = int(rng.integers(-2 * p, 2 * p + 1))
        base = np.arange(p) * q / p
        x = PeriodicConfiguration(p, q, base + rng.uniform(-1, 1, p))
        y = PeriodicConfiguration(p, q, base + rng.uniform(-1, 1, p))
        # slack = W(x) + W(y) - W(m) - W(M) >= 0
        lhs.append(-minmax_slack(pot, x, y))
        rhs.append(0.0)
    return _aggregate("minmax", lhs, rhs, ROUNDOFF)


def check_gap(pot, n_points=32, max_p=34, opts=DEFAULT_OPTIONS):
    """``gap_l1(x^-, x^+) <= 1`` at golden convergents with ``p <= max_p``."""
    lhs = []
    rats = [c.rational for c in convergents(GOLDEN_MEAN, 20) if c.p <= max_p]
    for r in rats:
        for k in range(n_points):
            lhs.append(neighbor_pair(pot, r.p, r.q, k / n_points, opts).gap_l1)
    return _aggregate("gap_l1", lhs, np.ones(len(lhs)), GAP_SLACK,
                      rotations=[str(r) for r in rats])


def check_near_periodicity(pot, chain_length=11, grid=128, opts=DEFAULT_OPTIONS):
    """Every convergent minimizer against every earlier convergent."""
    chain = [c.rational for c in convergents(GOLDEN_MEAN, chain_length)]
    lhs, rhs = [], []
    for big, small in itertools.combinations(chain[::-1], 2):
        x = barrier_profile(pot, big, grid, opts).minimizer.configuration
        npd = near_periodicity_defect(x, small.p, small.q, pot.range)
        lhs.append(npd.defect)
        rhs.append(npd.bound)
    return _aggregate("near_periodicity", lhs, rhs)


def check_uniform_bound(pot, consts, rotations, grid=128, opts=DEFAULT_OPTIONS):
    """``P <= D r`` for rotation numbers bounded by ``L``."""
    sups = [barrier_profile(pot, r, grid, opts).sup for r in rotations]
    bound = consts.D * pot.range
    return _aggregate("uniform_bound", sups, [bound] * len(sups), 1e-6)


def check_aubry(pot, rotations, grid=128, opts=DEFAULT_OPTIONS):
    """Birkhoff defects and sandwich violations of every minimizer computed."""
    profs = [barrier_profile(pot, r, grid, opts) for r in rotations]
    defects = [p.max_birkhoff_defect for p in profs]
    sandwich = [p.max_sandwich_violation for p in profs]
    return [_aggregate("aubry_birkhoff", defects, [AUBRY_FUZZ] * len(defects)),
            _aggregate("aubry_sandwich", sandwich, [AUBRY_FUZZ] * len(sandwich))]


def check_robustness(pot, deltas, rotation, grid=128, opts=DEFAULT_OPTIONS):
    bump = OnsitePotential(CosineSeries((1.0,)), pot.range)
    rows = robustness_sweep(pot, bump, deltas, Rational.parse(rotation), grid, opts=opts)
    return [EstimateReport("robustness", r.difference, r.bound + 1e-8, r.passed,
                           {"delta": r.delta, "rotation": str(r.rotation),
                            "conditions_ok": r.conditions_ok}) for r in rows]


def run_battery(pot, settings: BatterySettings = BatterySettings(), opts=DEFAULT_OPTIONS,
                pairs=None):
    """All checks for one model; returns a list of ``EstimateReport``."""
    rng = np.random.default_rng(settings.seed)
    consts = estimate_constants(pot, settings.L, samples=settings.lipschitz_samples,
                                seed=settings.seed)
    pairs = standard_pairs() if pairs is None else pairs
    reports = [check_lipschitz(pot, consts, rng, settings.lipschitz_pairs, settings.max_segment),
               check_minmax(pot, rng, settings.minmax_pairs),
               check_gap(pot, settings.gap_points, settings.gap_max_p, opts),
               check_near_periodicity(pot, settings.chain_length, settings.grid, opts)]
    reports += verify_difference_estimate(pot, pairs, settings.L, settings.grid,
                                          settings.c_scale, opts, constants=consts)
    rotations = sorted({r for pr in pairs for r in pr}, key=lambda r: (r.p, r.q))
    reports.append(check_uniform_bound(pot, consts, rotations, settings.grid, opts))
    reports += check_aubry(pot, rotations, settings.grid, opts)
    reports += check_robustness(pot, settings.deltas, settings.robustness_rotation,
                                settings.grid, opts)
    return reports, consts
