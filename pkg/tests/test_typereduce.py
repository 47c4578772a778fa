import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from it2tsk.typereduce import (
    KMResult,
    NoFireError,
    defuzzify,
    km_brute_force,
    km_reduce,
    km_reduce_batch,
)


def random_instance(rng, c):
    y = rng.normal(size=c) * rng.choice([0.1, 1, 10])
    a, b = rng.uniform(size=c), rng.uniform(size=c)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    # exercise exact zeros, degenerate cells and duplicate outputs
    if rng.uniform() < 0.3:
        lo[rng.integers(c)] = 0.0
    if rng.uniform() < 0.3:
        j = rng.integers(c)
        lo[j] = hi[j]
    if c > 1 and rng.uniform() < 0.2:
        y[1] = y[0]
    if hi.sum() == 0:
        hi[0] = 0.5
    return y, lo, hi


def test_degenerate_intervals_give_type1_mean():
    y = np.array([0.3, -1.0, 2.0])
    w = np.array([0.2, 0.5, 0.9])
    km = km_reduce(y, w, w)
    assert km.y_lower == pytest.approx(w @ y / w.sum())
    assert km.y_upper == pytest.approx(w @ y / w.sum())
    assert km_brute_force(y, w, w) == pytest.approx((w @ y / w.sum(),) * 2)


def test_two_rule_example():
    km = km_reduce([0.0, 1.0], [0.2, 0.2], [0.8, 0.8])
    assert km.y_lower == pytest.approx(0.2) and km.y_upper == pytest.approx(0.8)
    assert km_brute_force([0.0, 1.0], [0.2, 0.2], [0.8, 0.8]) == pytest.approx((0.2, 0.8))
    assert defuzzify(km) == pytest.approx(0.5)


def test_single_rule():
    km = km_reduce([3.7], [0.1], [0.9])
    assert km.y_lower == km.y_upper == 3.7


def test_switch_points_and_order():
    y = np.array([2.0, 0.0, 1.0])
    km = km_reduce(y, [0.1, 0.1, 0.1], [0.9, 0.9, 0.9])
    assert list(km.order) == [1, 2, 0]
    assert 0 <= km.p <= 3 and 0 <= km.q <= 3
    idx = np.arange(3)
    ys = y[km.order]
    w = np.where(idx < km.p, 0.9, 0.1)
    assert km.y_lower == pytest.approx(w @ ys / w.sum())
    w = np.where(idx < km.q, 0.1, 0.9)
    assert km.y_upper == pytest.approx(w @ ys / w.sum())


def test_no_fire():
    with pytest.raises(NoFireError):
        km_reduce([1.0, 2.0], [0.0, 0.0], [0.0, 0.0])
    with pytest.raises(NoFireError):
        km_brute_force([1.0, 2.0], [0.0, 0.0], [0.0, 0.0])


def test_bad_intervals_rejected():
    with pytest.raises(ValueError):
        km_reduce([1.0, 2.0], [0.5, 0.1], [0.2, 0.3])
    with pytest.raises(ValueError):
        km_reduce([1.0], [0.1, 0.2], [0.3, 0.4])


def test_defuzzify():
    assert defuzzify(KMResult(0.7, 0.7, 0, 0, np.array([0]))) == 0.7
    assert defuzzify(KMResult(0.2, 0.8, 1, 1, np.array([0, 1]))) == pytest.approx(0.5)


def test_oracle_equivalence_random(rng):
    for _ in range(300):
        c = int(rng.integers(1, 7))
        y, lo, hi = random_instance(rng, c)
        km = km_reduce(y, lo, hi)
        bl, bu = km_brute_force(y, lo, hi)
        assert abs(km.y_lower - bl) <= 1e-10 and abs(km.y_upper - bu) <= 1e-10


def test_batch_matches_scalar(rng):
    n, c = 200, 5
    Y = rng.normal(size=(n, c))
    A, B = rng.uniform(size=(n, c)), rng.uniform(size=(n, c))
    L, H = np.minimum(A, B), np.maximum(A, B)
    L[3] = H[3] = 0.0
    yl, yr, a, b = km_reduce_batch(Y, L, H)
    assert np.isnan(yl[3]) and np.all(a[3] == 0)
    for k in range(n):
        if k == 3:
            continue
        km = km_reduce(Y[k], L[k], H[k])
        assert yl[k] == pytest.approx(km.y_lower, abs=1e-12)
        assert yr[k] == pytest.approx(km.y_upper, abs=1e-12)
        assert a[k] @ Y[k] == pytest.approx(yl[k], abs=1e-12)
        assert b[k] @ Y[k] == pytest.approx(yr[k], abs=1e-12)
        assert a[k].sum() == pytest.approx(1) and b[k].sum() == pytest.approx(1)


instances = st.integers(1, 6).flatmap(
    lambda c: st.tuples(
        st.lists(st.floats(-100, 100), min_size=c, max_size=c),
        st.lists(st.floats(0, 1), min_size=c, max_size=c),
        st.lists(st.floats(0, 1), min_size=c, max_size=c),
    )
)


@settings(max_examples=300, deadline=None)
@given(inst=instances, shift=st.floats(-50, 50), scale=st.floats(0.01, 100))
def test_km_properties(inst, shift, scale):
    y = np.array(inst[0])
    a, b = np.array(inst[1]), np.array(inst[2])
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    if hi.sum() == 0:
        hi[0] = 1.0
    km = km_reduce(y, lo, hi)
    tol = 1e-9 * (1 + np.abs(y).max())
    assert km.y_lower <= km.y_upper
    assert y.min() - tol <= km.y_lower and km.y_upper <= y.max() + tol
    shifted = km_reduce(y + shift, lo, hi)
    assert shifted.y_lower == pytest.approx(km.y_lower + shift, abs=1e-8 * (1 + abs(shift)) + tol)
    assert shifted.y_upper == pytest.approx(km.y_upper + shift, abs=1e-8 * (1 + abs(shift)) + tol)
    scaled = km_reduce(y * scale, lo, hi)
    assert scaled.y_lower == pytest.approx(km.y_lower * scale, rel=1e-9, abs=tol * scale)
    assert scaled.y_upper == pytest.approx(km.y_upper * scale, rel=1e-9, abs=tol * scale)
    collapsed = km_reduce(y, hi, hi)
    assert collapsed.y_upper - collapsed.y_lower == pytest.approx(0, abs=tol)
