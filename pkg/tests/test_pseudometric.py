import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from morbit.dynsys import (
    CirclePoint, CircleRotation, DiscreteMeasure, FullShift, IntervalPoint, ShiftPoint, orbit,
    tent,
)
from morbit.errors import ValidationError
from morbit.periodic import periodic_orbit
from morbit.pseudometric import (
    besicovitch_finite, coarsen_point, coarsening_bound, doubling_horizons, ebar_estimate,
    ebar_finite, sequence_vset, snapshots, vset_estimate,
)
from morbit.transport import gamma, w1_discrete
from oracles import brute_force_assignment
from strategies import interval_points, shift_points

T = tent()
SHIFT = FullShift(2)
I = IntervalPoint


def test_ebar_examples():
    x = I(F(3, 7))
    assert ebar_finite(T, x, x, 9) == 0
    for n in (1, 5, 17):
        assert ebar_finite(SHIFT, ShiftPoint("", "0"), ShiftPoint("", "1"), n) == 1
    v = ebar_finite(T, I(F(2, 5)), I(F(2, 3)), 4)
    assert v == F(1, 5)
    assert v == brute_force_assignment(T.dist, orbit(T, I(F(2, 5)), 4), orbit(T, I(F(2, 3)), 4))


def test_ebar_estimate_examples():
    x = ShiftPoint("", "0011")
    y = ShiftPoint("", "0110")
    est = ebar_estimate(SHIFT, x, y, [4, 8, 16, 32])
    assert est.values == (0, 0, 0, 0) and est.limsup_estimate == 0
    a, b = ShiftPoint("", "01"), ShiftPoint("", "0011")
    ref = w1_discrete(periodic_orbit(SHIFT, a).measure, periodic_orbit(SHIFT, b).measure, SHIFT)[0]
    est = ebar_estimate(SHIFT, a, b, [4, 8, 16, 32, 64])
    assert est.limsup_estimate == ref
    assert est.rows()[0] == (4, ref)


def test_ebar_estimate_rotation():
    rng = np.random.default_rng(0)
    rot = CircleRotation((math.sqrt(5) - 1) / 2)
    x, y = (CirclePoint(float(v)) for v in rng.random(2))
    est = ebar_estimate(rot, x, y, doubling_horizons(256, 4096))
    assert est.limsup_estimate <= 0.05


def test_ebar_estimate_validation():
    with pytest.raises(ValidationError):
        ebar_estimate(T, I(0), I(1), [4, 4])
    with pytest.raises(ValidationError):
        ebar_estimate(T, I(0), I(1), [4, 8], tail_window=3)


def test_ebar_estimate_mapper_is_order_preserving():
    from concurrent.futures import ThreadPoolExecutor
    a, b = ShiftPoint("1", "001"), ShiftPoint("", "01")
    hs = [3, 6, 12, 24]
    with ThreadPoolExecutor(4) as ex:
        par = ebar_estimate(SHIFT, a, b, hs, mapper=ex.map)
    assert par == ebar_estimate(SHIFT, a, b, hs)


def test_besicovitch_examples():
    x = I(F(1, 9))
    assert besicovitch_finite(T, x, x, 7) == 0
    assert besicovitch_finite(SHIFT, ShiftPoint("", "0"), ShiftPoint("", "1"), 5) == 1


@given(interval_points, interval_points, interval_points, st.integers(1, 12))
def test_ebar_pseudometric_interval(x, y, z, n):
    xy = ebar_finite(T, x, y, n)
    assert xy == ebar_finite(T, y, x, n)
    assert ebar_finite(T, x, z, n) <= xy + ebar_finite(T, y, z, n)
    assert xy <= besicovitch_finite(T, x, y, n) <= 1


@given(shift_points, shift_points, shift_points, st.integers(1, 12))
def test_ebar_pseudometric_shift(x, y, z, n):
    xy = ebar_finite(SHIFT, x, y, n)
    assert xy == ebar_finite(SHIFT, y, x, n)
    assert ebar_finite(SHIFT, x, z, n) <= xy + ebar_finite(SHIFT, y, z, n)
    assert xy <= besicovitch_finite(SHIFT, x, y, n) <= 1


@given(st.lists(st.integers(0, 1), min_size=1, max_size=4),
       st.lists(st.integers(0, 1), min_size=1, max_size=4), st.integers(1, 3))
def test_periodic_lcm_identity(u, v, k):
    x, y = ShiftPoint((), tuple(u)), ShiftPoint((), tuple(v))
    ox, oy = periodic_orbit(SHIFT, x), periodic_orbit(SHIFT, y)
    L = math.lcm(ox.period, oy.period)
    ref = w1_discrete(ox.measure, oy.measure, SHIFT)[0]
    assert ebar_finite(SHIFT, x, y, L * k) == ref


def test_coarsening():
    p = coarsen_point(I(F(1, 3)), bins=4)
    assert p == I(F(3, 8))
    assert T.dist(p, I(F(1, 3))) <= coarsening_bound(T, bins=4)
    assert coarsen_point(I(1), bins=4) == I(F(7, 8))
    rot = CircleRotation(0)
    q = CirclePoint(F(99, 100))
    assert rot.dist(coarsen_point(q, bins=8), q) <= coarsening_bound(rot, bins=8)
    s = ShiftPoint("101101", "1")
    c = coarsen_point(s, cylinder=3)
    assert c.window(3) == (1, 0, 1)
    assert SHIFT.dist(c, s) <= coarsening_bound(SHIFT, cylinder=3)


def test_vset_examples():
    est = vset_estimate(T, I(F(2, 3)), [1, 4, 16])
    assert all(len(s) == 1 for s in est.snapshots)
    assert all(v == 0 for row in est.pairwise_gamma for v in row)
    rot = CircleRotation((math.sqrt(5) - 1) / 2)
    est = vset_estimate(rot, CirclePoint(0.1), [1024, 2048, 4096])
    late = [est.pairwise_gamma[i][j] for i in range(3) for j in range(3)]
    assert max(late) < 0.05
    for row_i, row in enumerate(est.pairwise_gamma):
        assert row[row_i] == 0
        for j, v in enumerate(row):
            assert v == est.pairwise_gamma[j][row_i]
    assert all(sum(s.weights) == 1 for s in est.snapshots)


def test_snapshot_error_bound():
    # raw vs coarsened snapshot differ by at most the coarsening bound
    xs = orbit(T, I(F(1, 7)), 21)
    raw = DiscreteMeasure.uniform(xs)
    snap = snapshots(T, xs, [21], bins=16)[0]
    assert gamma(raw, snap, T) <= coarsening_bound(T, bins=16)


def test_sequence_vset_bad_checkpoint():
    with pytest.raises(ValidationError):
        sequence_vset(T, [I(0)] * 3, [2, 5])
