import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from peierls import (PeriodicConfiguration, SolverOptions, birkhoff_defect, compare, make_fk,
                     make_twist, minimize_constrained, minimize_periodic, minmax_combine,
                     neighbor_pair, periodic_action)
from peierls.action import periodic_gradient
from peierls.lattice import Order
from peierls.solver import (ConvergenceError, gap_l1, minmax_slack, periodic_starts)
from oracles import fk_period2_constrained, twist_period2_min

# frozen from oracles.twist_period2_min(2.0): grid step 1e-3 plus Nelder-Mead
TWIST2_PERIOD2_MIN = 0.22644631276887275
# frozen from oracles.fk_period2_constrained(4.0, 0.25)
FK4_CONSTRAINED_ETA = 0.9139083488665318
FK4_CONSTRAINED_W = 0.3926527286713393


def test_frozen_oracles_reproduce():
    assert twist_period2_min(2.0, step=2e-3) == pytest.approx(TWIST2_PERIOD2_MIN, abs=1e-12)
    w, roots = fk_period2_constrained(4.0, 0.25)
    assert w == pytest.approx(FK4_CONSTRAINED_W, abs=1e-14)
    assert any(abs(r - FK4_CONSTRAINED_ETA) < 1e-12 for r in roots)


@pytest.mark.parametrize("kw", [{"tol": 0}, {"fuzz": -1}, {"max_iters": 0}, {"starts": 0}])
def test_options_validation(kw):
    with pytest.raises(ValueError):
        SolverOptions(**kw)


def test_options_round_trip():
    o = SolverOptions(tol=1e-9, starts=3)
    assert SolverOptions.from_dict(o.as_dict()) == o
    assert SolverOptions.from_dict(None) == SolverOptions()


@pytest.mark.parametrize("p,q", [(1, 0), (3, 1), (5, 8), (4, -3)])
def test_flat_fk_gives_lines(fk0, p, q):
    res = minimize_periodic(fk0, p, q)
    v = res.values
    np.testing.assert_allclose(np.diff(v), q / p, atol=1e-9)
    assert res.action == pytest.approx(p * (q / p) ** 2 / 2, abs=1e-12)


def test_fk4_single_site(fk4):
    res = minimize_periodic(fk4, 1, 0)
    assert res.values[0] == pytest.approx(0.0, abs=1e-12)
    assert res.action == pytest.approx(0.0, abs=1e-15)


def test_twist_period_two(twist2):
    assert minimize_periodic(twist2, 2, 1).action == pytest.approx(TWIST2_PERIOD2_MIN, abs=1e-12)


def test_fk4_constrained_period_two(fk4):
    res = minimize_constrained(fk4, 2, 1, 0.25)
    assert res.values[0] == 0.25
    assert res.values[1] == pytest.approx(FK4_CONSTRAINED_ETA, abs=1e-9)
    assert res.action == pytest.approx(FK4_CONSTRAINED_W, abs=1e-12)


def test_fk4_constrained_half(fk4):
    res = minimize_constrained(fk4, 1, 0, 0.5)
    assert res.values[0] == 0.5
    assert res.action == pytest.approx(2 / math.pi ** 2, abs=1e-15)


@pytest.mark.parametrize("pot", [make_fk([1.0], [4.0]), make_twist(2.0)], ids=["fk4", "twist2"])
@pytest.mark.parametrize("p,q", [(3, 2), (8, 13), (21, 34)])
def test_inactive_constraint(pot, p, q):
    base = minimize_periodic(pot, p, q)
    res = minimize_constrained(pot, p, q, base.values[0])
    assert res.action == pytest.approx(base.action, abs=1e-10)


@pytest.mark.parametrize("pot", [make_fk([1.0], [4.0]), make_twist(2.0), make_fk([1.0, 0.4], [3.0]),
                                 make_fk([1.0], [8.0])], ids=["fk4", "twist2", "fk-r2", "fk8"])
@pytest.mark.parametrize("p,q", [(1, 0), (1, 1), (2, 1), (5, 3), (13, 8), (34, 21), (89, 144),
                                 (7, -2)])
def test_minimizer_is_birkhoff_critical_point(pot, p, q):
    res = minimize_periodic(pot, p, q)
    assert res.birkhoff_defect <= 1e-8
    assert np.max(np.abs(periodic_gradient(pot, res.configuration))) <= 1e-9
    assert 0.0 <= res.values[0] < 1.0


def test_minimum_beats_random_configurations(twist2):
    res = minimize_periodic(twist2, 5, 3)
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = PeriodicConfiguration(5, 3, np.arange(5) * 0.6 + rng.uniform(-0.5, 0.5, 5))
        assert periodic_action(twist2, x).value >= res.action - 1e-12


def test_non_reduced_rotation_is_lifted(fk4):
    with pytest.warns(UserWarning, match="reduced"):
        res = minimize_periodic(fk4, 4, 2)
    base = minimize_periodic(fk4, 2, 1)
    assert (res.configuration.p, res.configuration.q) == (4, 2)
    assert res.action == pytest.approx(2 * base.action)


def test_negative_period_and_zero(fk4):
    a = minimize_periodic(fk4, -3, -2)
    assert (a.configuration.p, a.configuration.q) == (3, 2)
    with pytest.raises(ValueError):
        minimize_periodic(fk4, 0, 1)


def test_constrained_requires_coprime(fk4):
    with pytest.raises(ValueError):
        minimize_constrained(fk4, 4, 2, 0.1)
    with pytest.raises(ValueError):
        neighbor_pair(fk4, 2, 4, 0.1)


def test_convergence_error_carries_best(fk4):
    opts = SolverOptions(tol=1e-30, max_iters=2, starts=1)
    with pytest.raises(ConvergenceError) as err:
        minimize_periodic(fk4, 5, 3, opts)
    assert err.value.best is not None and not err.value.best.converged


def test_starts_cover_unit_offsets():
    s = periodic_starts(3, 2, 4)
    assert len(s) == 8
    assert all(v.shape == (3,) for v in s)


@given(st.floats(0, 1, exclude_max=True))
def test_flat_neighbors_coincide(xi):
    pair = neighbor_pair(make_fk([1.0], [0.0]), 3, 2, xi)
    assert pair.degenerate and pair.gap_l1 == 0.0


def test_fk4_neighbors_at_half(fk4):
    pair = neighbor_pair(fk4, 1, 0, 0.5)
    assert pair.lower.values[0] == pytest.approx(0.0, abs=1e-12)
    assert pair.upper.values[0] == pytest.approx(1.0, abs=1e-12)
    assert pair.gap_l1 == pytest.approx(1.0, abs=1e-12)


def test_twist_gap_at_five_thirds(twist2):
    pair = neighbor_pair(twist2, 3, 5, 0.5)
    assert 0.0 < pair.gap_l1 <= 1.0 + 1e-6
    assert compare(pair.lower.configuration, pair.upper.configuration).le


@pytest.mark.parametrize("p,q", [(5, 3), (13, 8), (34, 21), (144, 89)])
@pytest.mark.parametrize("xi", [0.0, 0.13, 0.5, 0.77])
def test_constrained_is_sandwiched(twist2, p, q, xi):
    res = minimize_constrained(twist2, p, q, xi)
    pair = neighbor_pair(twist2, p, q, xi)
    assert res.sandwich_violation <= 1e-8
    assert pair.lower.values[0] <= xi + 1e-8 <= pair.upper.values[0] + 2e-8
    assert res.action >= minimize_periodic(twist2, p, q).action - 1e-9


def test_minmax_ordered_and_equal(fk4):
    x = PeriodicConfiguration(3, 1, [0.0, 0.3, 0.7])
    y = x + 0.2
    m, M = minmax_combine(x, y)
    np.testing.assert_array_equal(m.values, x.values)
    np.testing.assert_array_equal(M.values, y.values)
    assert minmax_slack(fk4, x, y) == pytest.approx(0.0, abs=1e-14)
    assert minmax_slack(fk4, x, x) == 0.0


def test_minmax_strict_for_crossing(fk4):
    x = PeriodicConfiguration(2, 0, [0.0, 0.5])
    y = PeriodicConfiguration(2, 0, [0.3, 0.2])
    assert minmax_slack(fk4, x, y) > 1e-3


def test_minmax_requires_same_space():
    with pytest.raises(ValueError):
        minmax_combine(PeriodicConfiguration(1, 0, [0.0]), PeriodicConfiguration(1, 1, [0.0]))


@given(st.integers(1, 8), st.integers(-8, 8), st.integers(0, 2 ** 31))
def test_minmax_property(p, q, seed):
    rng = np.random.default_rng(seed)
    base = np.arange(p) * q / p
    x = PeriodicConfiguration(p, q, base + rng.uniform(-1, 1, p))
    y = PeriodicConfiguration(p, q, base + rng.uniform(-1, 1, p))
    assert minmax_slack(make_twist(2.0), x, y) >= -1e-9


def test_gap_l1():
    a = PeriodicConfiguration(2, 1, [0.0, 0.5])
    assert gap_l1(a, a + 0.25) == pytest.approx(0.5)
