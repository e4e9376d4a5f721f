import numpy as np
import pytest
from hypothesis import given, strategies as st

from peierls import PeriodicConfiguration, make_fk
from peierls.action import CyclicBandMatrix, hessian_diagonals
from peierls.banded import band_width, lower_band, solve_cyclic, zigzag_order


@pytest.mark.parametrize("p,expected", [(1, [0]), (4, [0, 3, 1, 2]), (5, [0, 4, 1, 3, 2])])
def test_zigzag(p, expected):
    assert zigzag_order(p).tolist() == expected
    assert zigzag_order(p, drop_first=True).tolist() == expected[1:]


def random_spd_diags(rng, p, r):
    """Cyclic band SPD matrix: a chain Hessian plus a positive diagonal."""
    pot = make_fk(list(rng.uniform(0.2, 1.0, r)), [0.0])
    x = PeriodicConfiguration(p, 0, rng.uniform(-1, 1, p))
    d = hessian_diagonals(pot, x)
    d[r] += rng.uniform(0.5, 2.0, p)
    return d


@given(st.integers(1, 30), st.integers(1, 3), st.booleans(), st.integers(0, 2 ** 31))
def test_lower_band_holds_every_entry(p, r, drop, seed):
    if drop and p == 1:
        return
    d = random_spd_diags(np.random.default_rng(seed), p, r)
    A = CyclicBandMatrix(d).to_dense()
    ab, order = lower_band(d, drop)
    B = A[np.ix_(order, order)]
    n = order.size
    b = band_width(p, r, drop)
    assert ab.shape == (b + 1, n)
    # nothing outside the band
    i, j = np.indices(B.shape)
    assert np.all(B[np.abs(i - j) > b] == 0)
    for k in range(b + 1):
        np.testing.assert_allclose(ab[k, :n - k], np.diag(B, -k))


@given(st.integers(1, 40), st.integers(1, 3), st.booleans(), st.integers(0, 2 ** 31))
def test_solve_cyclic_matches_dense(p, r, drop, seed):
    if drop and p == 1:
        return
    rng = np.random.default_rng(seed)
    d = random_spd_diags(rng, p, r)
    A = CyclicBandMatrix(d).to_dense()
    if drop:
        A = A[1:, 1:]
    rhs = rng.normal(size=A.shape[0])
    u = solve_cyclic(d, rhs, drop)
    np.testing.assert_allclose(A @ u, rhs, atol=1e-9)


def test_shift_and_indefinite():
    d = np.array([[0.0, 0.0], [-1.0, -1.0], [0.0, 0.0]])
    with pytest.raises(np.linalg.LinAlgError):
        solve_cyclic(d, np.ones(2))
    np.testing.assert_allclose(solve_cyclic(d, np.ones(2), shift=2.0), [1.0, 1.0])
