import numpy as np
import pytest

from peierls import Rational, estimate_constants, make_fk, make_twist
from peierls.battery import (BatterySettings, check_gap, check_lipschitz, check_minmax,
                             check_near_periodicity, run_battery, standard_pairs)


def test_standard_pairs_shape():
    pairs = standard_pairs()
    assert len(pairs) == 20
    assert all(abs(float(r)) <= 2 and r.p <= 233 for pr in pairs for r in pr)
    assert (Rational(144, 233), Rational(233, 377)) not in pairs
    assert pairs[-1] == (Rational(89, 144), Rational(144, 233))


@pytest.mark.parametrize("pot", [make_fk([1.0], [4.0]), make_twist(2.0), make_fk([1.0, 0.5], [2.0])],
                         ids=["fk4", "twist2", "fk-r2"])
def test_lipschitz_and_minmax(pot):
    rng = np.random.default_rng(0)
    consts = estimate_constants(pot, 2.0, samples=2048)
    rep = check_lipschitz(pot, consts, rng, n_pairs=200)
    assert rep.passed and rep.detail["samples"] == 200
    assert check_minmax(pot, rng, n_pairs=200).passed


def test_lipschitz_detects_understated_constant():
    pot = make_fk([1.0], [4.0])
    consts = estimate_constants(pot, 2.0, samples=1024)
    from dataclasses import replace
    bad = replace(consts, D=consts.D * 1e-3)
    assert not check_lipschitz(pot, bad, np.random.default_rng(0), n_pairs=100).passed


def test_gap_and_near_periodicity_small():
    pot = make_twist(2.0)
    assert check_gap(pot, n_points=8, max_p=13).passed
    assert check_near_periodicity(pot, chain_length=6, grid=16).passed


def test_run_battery_reports():
    s = BatterySettings(grid=16, lipschitz_pairs=50, minmax_pairs=50, gap_points=4, gap_max_p=8,
                        chain_length=5, lipschitz_samples=512)
    reports, consts = run_battery(make_fk([1.0], [4.0]), s, pairs=[(Rational(2, 1), Rational(3, 2))])
    assert all(r.passed for r in reports)
    assert consts.E == 2
    assert sum(r.check == "robustness" for r in reports) == 2
