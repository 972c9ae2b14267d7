import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedylds.discrepancy import (
    Kind,
    critical_grid,
    l2_star_warnock,
    linf_star,
    linf_star_1d,
    linf_star_exact,
    linf_star_sampled,
    local_discrepancy,
)
from greedylds.sequences import niederreiter_set


def brute_linf(x):
    """Every corner of the critical grid, open and closed counts, by plain loops."""
    n, d = x.shape
    axes = [sorted(set(x[:, k].tolist()) | {1.0}) for k in range(d)]
    best = 0.0
    for q in itertools.product(*axes):
        vol = float(np.prod(q))
        opened = sum(all(p[k] < q[k] for k in range(d)) for p in x)
        closed = sum(all(p[k] <= q[k] for k in range(d)) for p in x)
        best = max(best, vol - opened / n, closed / n - vol)
    return best


def l2_1d_exact(x):
    """Integral of (#{x < q}/n - q)^2 over [0, 1], piece by piece."""
    xs = np.sort(x)
    n = xs.size
    knots = np.concatenate([[0.0], xs, [1.0]])
    total = 0.0
    for j in range(n + 1):
        a, b, c = knots[j], knots[j + 1], j / n
        # integral of (c - q)^2 from a to b
        total += ((c - a) ** 3 - (c - b) ** 3) / 3
    return total


def test_niederreiter_sets_exact():
    for n in (1, 2, 7, 100):
        assert linf_star_1d(niederreiter_set(n)).value == pytest.approx(1 / (2 * n), abs=1e-15)


def test_corner_point_is_point_nine():
    # the box [0, 0.9) x [0, 1) is empty and has volume 0.9
    assert linf_star_exact(np.array([[0.9, 0.9]])).value == pytest.approx(0.9, abs=1e-15)
    assert brute_linf(np.array([[0.9, 0.9]])) == pytest.approx(0.9, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 3), st.integers(1, 9), st.integers(0, 2**32 - 1))
def test_exact_matches_brute_force(d, n, seed):
    x = np.random.default_rng(seed).random((n, d))
    assert linf_star_exact(x).value == pytest.approx(brute_linf(x), abs=1e-14)


def test_centre_point_corners():
    assert linf_star_exact(np.array([[0.5, 0.5]])).value == pytest.approx(0.75, abs=1e-15)
    assert linf_star_exact(np.array([[0.5, 0.5, 0.5]])).value == pytest.approx(0.875, abs=1e-15)


def test_duplicates_and_shared_coordinates():
    x = np.array([[0.25, 0.5], [0.25, 0.5], [0.25, 0.75], [0.5, 0.5]])
    assert linf_star_exact(x).value == pytest.approx(brute_linf(x), abs=1e-15)


def test_one_dimensional_forms_agree(rng):
    x = rng.random((30, 1))
    assert linf_star_1d(x).value == pytest.approx(brute_linf(x), abs=1e-15)
    assert linf_star(x).kind is Kind.LINF_EXACT


@pytest.mark.parametrize("d", [2, 3])
def test_sampled_is_lower_bound(rng, d):
    x = rng.random((15, d))
    m = 64
    ex = linf_star_exact(x).value
    sa = linf_star_sampled(x, m)
    assert sa.kind is Kind.LINF_LOWER_BOUND
    assert sa.value <= ex <= sa.value + d / m


def test_critical_grid_ends_with_one(rng):
    g = critical_grid(rng.random((5, 2)))
    assert all(a[-1] == 1.0 for a in g.axes) and g.shape == (6, 6)


def test_warnock_anchors():
    assert l2_star_warnock(np.array([[0.5]])).value == pytest.approx(1 / 12, abs=1e-15)
    assert l2_star_warnock(np.array([[0.5, 0.5]])).value == pytest.approx(23 / 288, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=40))
def test_warnock_1d_matches_piecewise_integral(xs):
    x = np.array(xs)
    assert l2_star_warnock(x.reshape(-1, 1)).value == pytest.approx(l2_1d_exact(x), abs=1e-13)


def test_warnock_chunking_invariant(rng):
    x = rng.random((300, 2))
    assert l2_star_warnock(x, chunk=7).value == pytest.approx(l2_star_warnock(x).value, abs=1e-15)


def test_local_discrepancy_open_boxes():
    x = np.array([[0.5, 0.5]])
    np.testing.assert_allclose(local_discrepancy(x, np.array([[0.5, 1.0], [0.6, 0.6]])),
                               [-0.5, 1 - 0.36])


def test_errors():
    with pytest.raises(ValueError):
        linf_star_exact(np.zeros((3, 1)))
    with pytest.raises(ValueError):
        linf_star_exact(np.zeros((0, 2)))
    with pytest.raises(ValueError):
        linf_star_sampled(np.zeros((2, 2)), 0)
    with pytest.raises(ValueError):
        l2_star_warnock(np.zeros((0, 1)))
