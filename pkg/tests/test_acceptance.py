"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line that is printed in the terminal summary
(``pytest tests/test_acceptance.py``) and also when run as a script.
"""

import math
import time

import numpy as np
import pytest

from peierls import (GOLDEN_MEAN, CosineSeries, OnsitePotential, PerturbedPotential, Rational,
                     barrier_irrational, barrier_profile, classify, convergents,
                     estimate_constants, make_fk, make_twist, near_periodicity_defect,
                     robustness_sweep, verify_difference_estimate)
from peierls import barrier, solver
from peierls.barrier import NOISE_FLOOR
from peierls.battery import (check_aubry, check_gap, check_lipschitz, check_minmax,
                             standard_pairs)

RESULTS = {}

FK0 = make_fk([1.0], [0.0])
FK4 = make_fk([1.0], [4.0])
FK8 = make_fk([1.0], [8.0])
TWIST2 = make_twist(2.0)
GRID = 128
L = 2.0


def golden_chain():
    """Golden-mean convergents 1/1, 2/1, ..., 233/144."""
    return [Rational(1, 1)] + [c.rational for c in convergents(GOLDEN_MEAN, 11)]


def record(key, passed, detail):
    RESULTS[key] = (bool(passed), detail)
    print(f"{key} {'PASS' if passed else 'FAIL'}: {detail}")
    assert passed, detail


def fresh():
    barrier.clear_cache()
    solver.clear_cache()


def test_c01_closed_form_barrier():
    fresh()
    t = time.perf_counter()
    pr = barrier_profile(FK4, Rational(1, 0), 64)
    elapsed = time.perf_counter() - t
    exact = 4.0 / (4 * math.pi ** 2) * (1 - np.cos(2 * np.pi * pr.grid))
    err = float(np.max(np.abs(pr.values - exact)))
    record("C1", err <= 1e-8 and elapsed < 1.0, f"max error {err:.2e}, {elapsed:.2f}s")


def test_c02_foliation_null_case():
    fresh()
    t = time.perf_counter()
    sups = {str(r): barrier_profile(FK0, r, GRID).sup for r in golden_chain()}
    verdict = classify(FK0, GOLDEN_MEAN, GRID, n_convergents=11).verdict
    elapsed = time.perf_counter() - t
    worst = max(sups.values())
    record("C2", worst <= 1e-9 and verdict == "foliation" and elapsed < 30,
           f"max sup {worst:.2e} over {len(sups)} convergents, {verdict}, {elapsed:.1f}s")


@pytest.mark.parametrize("name,pot", [("FK lambda=4", FK4), ("twist K=2", TWIST2)])
def test_c03_fundamental_estimate(name, pot):
    fresh()
    t = time.perf_counter()
    consts = estimate_constants(pot, L)
    reps = verify_difference_estimate(pot, standard_pairs(), L, GRID, constants=consts)
    elapsed = time.perf_counter() - t
    fails = [r.detail["pair"] for r in reps if not r.passed]
    worst = max(r.lhs / r.rhs for r in reps if r.rhs > 0)
    record(f"C3[{name}]", not fails and len(reps) == 20 and elapsed < 300,
           f"{len(reps) - len(fails)}/{len(reps)} pairs, C = {consts.C:.2f}, "
           f"max lhs/rhs {worst:.3f}, {elapsed:.1f}s" + (f", failed {fails}" if fails else ""))


@pytest.mark.parametrize("name,pot", [("FK lambda=4", FK4), ("twist K=2", TWIST2)])
def test_c04_near_periodicity(name, pot):
    chain = golden_chain()
    checked, fails, worst = 0, [], 0.0
    for i, big in enumerate(chain):
        x = barrier_profile(pot, big, GRID).minimizer.configuration
        for small in chain[:i]:
            npd = near_periodicity_defect(x, small.p, small.q, pot.range)
            checked += 1
            worst = max(worst, npd.defect / npd.bound)
            if not npd.passed:
                fails.append((str(big), str(small)))
    record(f"C4[{name}]", not fails, f"{checked - len(fails)}/{checked} pairs, "
           f"max defect/bound {worst:.3f}")


def test_c05_cauchy_convergence():
    rep = barrier_irrational(TWIST2, GOLDEN_MEAN, 11, GRID, L=L)
    C = rep.constants.C
    diffs = [d["lhs"] for d in rep.pairs]
    cauchy_ok = all(d["lhs"] <= 3 * C / Rational.parse(d["from"]).p + 1e-8 for d in rep.pairs)
    # below the noise floor the differences are solver roundoff and carry no order
    above = [d for d in diffs if d > NOISE_FLOOR]
    monotone = all(b < a for a, b in zip(above, above[1:]))
    res = classify(TWIST2, GOLDEN_MEAN, GRID, n_convergents=11)
    margin = res.sup_barrier - res.error_bar
    ok = (cauchy_ok and rep.convergents[-1].p == 144 and monotone and rep.shrink_factor >= 1.2
          and res.verdict == "lamination" and margin > res.threshold)
    record("C5", ok, f"Cauchy bound {'ok' if cauchy_ok else 'violated'}, "
           f"shrink factor {rep.shrink_factor:.2f} over {len(above)} differences above "
           f"{NOISE_FLOOR:g}, sup {res.sup_barrier:.6e} +- {res.error_bar:.1e}, {res.verdict}")


@pytest.mark.parametrize("name,pot", [("FK lambda=4", FK4), ("twist K=2", TWIST2)])
def test_c06_lipschitz(name, pot):
    t = time.perf_counter()
    consts = estimate_constants(pot, L)
    rep = check_lipschitz(pot, consts, np.random.default_rng(0), 1000, 50)
    elapsed = time.perf_counter() - t
    record(f"C6[{name}]", rep.passed and elapsed < 10,
           f"{rep.detail['samples'] - rep.detail['failures']}/{rep.detail['samples']} pairs, "
           f"D = {consts.D:.3f}, {elapsed:.2f}s")


@pytest.mark.parametrize("name,pot", [("FK lambda=4", FK4), ("twist K=2", TWIST2),
                                      ("FK r=2", make_fk([1.0, 0.5], [3.0]))])
def test_c07_minmax(name, pot):
    rep = check_minmax(pot, np.random.default_rng(1), 1000)
    record(f"C7[{name}]", rep.passed,
           f"{rep.detail['samples'] - rep.detail['failures']}/{rep.detail['samples']} pairs, "
           f"worst W(M)+W(m)-W(x)-W(y) = {rep.lhs:.2e}")


@pytest.mark.parametrize("name,pot", [("FK lambda=4", FK4), ("twist K=2", TWIST2)])
def test_c08_gap_bound(name, pot):
    rep = check_gap(pot, 32, 34)
    record(f"C8[{name}]", rep.passed and "34/55" not in rep.detail["rotations"]
           and "55/34" in rep.detail["rotations"],
           f"{rep.detail['samples']} neighbour pairs, max gap {rep.lhs:.6f}")


def test_c09_minimizers_ordered_and_sandwiched():
    rotations = {
        "FK lambda=0": (FK0, golden_chain()),
        "FK lambda=4": (FK4, sorted({r for pr in standard_pairs() for r in pr}, key=lambda r: r.p)),
        "twist K=2": (TWIST2, sorted({r for pr in standard_pairs() for r in pr}
                                     | set(golden_chain()), key=lambda r: r.p)),
    }
    lines, ok = [], True
    for name, (pot, rots) in rotations.items():
        birk, sand = check_aubry(pot, rots, GRID)
        ok &= birk.passed and sand.passed
        lines.append(f"{name}: defect {birk.lhs:.1e}, sandwich {sand.lhs:.1e}")
    record("C9", ok, "; ".join(lines))


def test_c10_robustness():
    t = time.perf_counter()
    bump = OnsitePotential(CosineSeries((1.0,)))
    deltas = (1e-4, 1e-3)
    rows = robustness_sweep(FK8, bump, deltas, GOLDEN_MEAN, GRID, n_convergents=11)
    verdicts = [classify(PerturbedPotential(FK8, d, bump), GOLDEN_MEAN, GRID,
                         n_convergents=11).verdict for d in deltas]
    elapsed = time.perf_counter() - t
    worst = max(r.difference / r.bound for r in rows)
    ok = all(r.passed for r in rows) and all(v == "lamination" for v in verdicts) and elapsed < 120
    record("C10", ok, f"{sum(r.passed for r in rows)}/{len(rows)} rows, max diff/bound "
           f"{worst:.3f}, verdicts {verdicts}, {elapsed:.1f}s")


def test_c11_negative_control():
    reps = verify_difference_estimate(FK4, standard_pairs(), L, GRID, c_scale=0.1)
    reps += verify_difference_estimate(TWIST2, standard_pairs(), L, GRID, c_scale=0.1)
    fails = [r.detail["pair"] for r in reps if not r.passed]
    worst = max(r.lhs / r.rhs for r in reps if r.rhs > 0)
    record("C11", bool(fails), f"C/10 fails on {len(fails)} of {len(reps)} pairs, "
           f"max lhs/rhs {worst:.3f}")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
