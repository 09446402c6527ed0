from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from morbit.dynsys import (
    CirclePoint, CircleRotation, DiscreteMeasure, FullShift, IntervalPoint, PiecewiseLinear,
    ShiftPoint, apply, compose, convex_combination, dist, empirical, is_quasi_regular, iterate,
    iterate_map, logistic, orbit, random_shift_point, swap_map, tent, tent_generic_orbit,
    truncation,
)
from morbit.errors import ValidationError, VariantMismatchError
from oracles import rational_pl_value
from strategies import circle_points, interval_points, shift_points

T = tent()
SHIFT = FullShift(2)


def test_apply_examples():
    assert apply(T, IntervalPoint(F(2, 5))) == IntervalPoint(F(4, 5))
    assert apply(SHIFT, ShiftPoint("0", "1")) == ShiftPoint("", "1")
    r = CircleRotation(0.3)
    assert apply(r, CirclePoint(0.9)).angle == pytest.approx(0.2, abs=1e-12)
    assert apply(CircleRotation(F(3, 10)), CirclePoint(F(9, 10))) == CirclePoint(F(1, 5))


def test_dist_examples():
    assert dist(T, IntervalPoint(F(1, 5)), IntervalPoint(F(7, 10))) == F(1, 2)
    assert dist(SHIFT, ShiftPoint("", "0"), ShiftPoint("", "1")) == 1
    assert dist(CircleRotation(0), CirclePoint(F(19, 20)), CirclePoint(F(1, 20))) == F(1, 5)


def test_orbit_examples():
    assert [p.value for p in orbit(T, IntervalPoint(F(2, 5)), 4)] == [F(2, 5), F(4, 5)] * 2
    rot = CircleRotation(F(1, 4))
    assert [p.angle for p in orbit(rot, CirclePoint(0), 4)] == [0, F(1, 4), F(1, 2), F(3, 4)]
    assert [p.value for p in orbit(T, IntervalPoint(F(1, 3)), 3)] == [F(1, 3), F(2, 3), F(2, 3)]


def test_empirical_examples():
    m = empirical(T, IntervalPoint(F(2, 3)), 5)
    assert m.n == 5 and set(m.atoms) == {IntervalPoint(F(2, 3))}
    m = empirical(T, IntervalPoint(F(2, 5)), 4)
    assert [p.value for p in m.atoms] == [F(2, 5), F(4, 5)] * 2
    d = m.to_discrete()
    assert d.mass(IntervalPoint(F(2, 5))) == F(1, 2)
    m = empirical(SHIFT, ShiftPoint("", "01"), 6)
    d = m.to_discrete()
    assert len(d) == 2
    assert d.mass(ShiftPoint("", "01")) == d.mass(ShiftPoint("", "10")) == F(1, 2)


def test_quasi_regular_examples():
    r = is_quasi_regular(T, IntervalPoint(F(2, 3)), [1, 2, 4, 8], 1e-9)
    assert r.regular and all(g == 0 for g in r.gaps)
    r = is_quasi_regular(T, IntervalPoint(F(2, 5)), [2, 4, 8, 16], 1e-9)
    assert r.regular and all(g == 0 for g in r.gaps)
    golden = (5 ** 0.5 - 1) / 2
    r = is_quasi_regular(CircleRotation(golden), CirclePoint(0.0), [512, 1024, 2048, 4096], 0.05)
    assert r.regular and r.max_gap < 0.05


def test_quasi_regular_rejects_bad_horizons():
    with pytest.raises(ValidationError):
        is_quasi_regular(T, IntervalPoint(0), [4, 2], 0.1)


def test_convex_combination_examples():
    mu = DiscreteMeasure.uniform([IntervalPoint(F(2, 5)), IntervalPoint(F(4, 5))])
    assert convex_combination([(1, mu)]) == mu
    a = DiscreteMeasure.dirac(IntervalPoint(F(1, 7)))
    assert convex_combination([(F(1, 2), a), (F(1, 2), a)]) == a
    c = convex_combination([(F(1, 3), DiscreteMeasure.dirac(IntervalPoint(0))),
                            (F(2, 3), DiscreteMeasure.dirac(IntervalPoint(1)))])
    assert c.mass(IntervalPoint(0)) == F(1, 3) and c.mass(IntervalPoint(1)) == F(2, 3)
    with pytest.raises(ValidationError):
        convex_combination([(F(1, 2), a)])


def test_point_invariants():
    with pytest.raises(ValidationError):
        IntervalPoint(F(3, 2))
    with pytest.raises(ValidationError):
        ShiftPoint("01", "")
    with pytest.raises(ValidationError):
        FullShift(1)


def test_variant_mismatch():
    with pytest.raises(VariantMismatchError):
        apply(T, CirclePoint(0))
    with pytest.raises(VariantMismatchError):
        dist(SHIFT, IntervalPoint(0), IntervalPoint(1))


def test_pl_invariants():
    with pytest.raises(ValidationError):  # discontinuous at 1/2
        PiecewiseLinear([0, F(1, 2), 1], [1, 0], [0, 0])
    with pytest.raises(ValidationError):  # leaves [0,1]
        PiecewiseLinear([0, 1], [2], [0])


def test_swap_map_values():
    g = swap_map()
    assert g.value(0) == 1 and g.value(F(1, 2)) == F(1, 2)
    assert g.value(F(3, 4)) == 0 and g.value(1) == F(1, 2)
    assert g.image(0, F(1, 2)) == (F(1, 2), 1)
    assert g.image(F(1, 2), 1) == (0, F(1, 2))


@given(st.integers(0, 200), st.integers(1, 201))
def test_pl_value_matches_linear_scan(a, b):
    x = F(min(a, b), max(a, b))
    for f in (T, swap_map()):
        assert f.value(x) == rational_pl_value(f.breakpoints, f.slopes, f.intercepts, x)


def test_compose_and_iterate_map():
    g = compose(T, T)
    f3 = iterate_map(T, 3)
    for k in range(0, 41):
        x = F(k, 40)
        assert g.value(x) == T.value(T.value(x))
        assert f3.value(x) == iterate(T, IntervalPoint(x), 3).value
    assert f3.n_pieces == 8


@pytest.mark.parametrize("pts", [interval_points, circle_points, shift_points])
def test_metric_axioms(pts):
    system = {interval_points: T, circle_points: CircleRotation(F(1, 3)),
              shift_points: SHIFT}[pts]

    @given(pts, pts, pts)
    def check(a, b, c):
        d = system.dist
        assert d(a, a) == 0
        assert d(a, b) == d(b, a)
        assert 0 <= d(a, b) <= 1
        assert d(a, c) <= d(a, b) + d(b, c)

    check()


def test_diameter_witnesses():
    assert T.dist(IntervalPoint(0), IntervalPoint(1)) == 1
    assert SHIFT.dist(ShiftPoint("", "0"), ShiftPoint("", "1")) == 1
    assert CircleRotation(0).dist(CirclePoint(0), CirclePoint(F(1, 2))) == 1


def test_float_metric_axioms_sampled():
    rng = np.random.default_rng(3)
    rot = CircleRotation(0.1)
    for _ in range(1000):
        a, b, c = (CirclePoint(float(v)) for v in rng.random(3))
        assert rot.dist(a, b) == rot.dist(b, a)
        assert rot.dist(a, c) <= rot.dist(a, b) + rot.dist(b, c) + 1e-12
        assert rot.dist(a, b) <= 1


@given(interval_points, st.integers(1, 30))
def test_orbit_consistency(x, n):
    a = orbit(T, x, n)
    b = orbit(T, x, n + 1)
    assert b[:n] == a and b[n] == apply(T, a[-1])


@given(shift_points, st.integers(1, 20))
def test_shift_orbit_consistency(x, n):
    b = orbit(SHIFT, x, n + 1)
    assert b[n] == apply(SHIFT, b[n - 1])


def test_exact_orbit_reproducible():
    x = IntervalPoint(F(123, 1001))
    a = orbit(T, x, 50)
    assert a == orbit(T, x, 50)
    assert a[37] == iterate(T, iterate(T, x, 20), 17)


def test_shift_closed_form_distance():
    a = ShiftPoint("1", "01")
    b = ShiftPoint("", "0")
    # coordinates of a: 1,0,1,0,1,...; of b: all 0 -> differ at i = 0, 2, 4, ...
    assert SHIFT.dist(a, b) == F(2, 3)
    partial = sum(F(1, 2 ** (i + 1)) for i in range(0, 200, 2))
    assert F(2, 3) - partial == F(2, 3) / 4 ** 100


def test_shift_point_normalization():
    assert ShiftPoint("0101", "01") == ShiftPoint("", "01")
    assert ShiftPoint("", "0101") == ShiftPoint("", "01")


def test_generators_are_seeded():
    a = random_shift_point(np.random.default_rng(7), 50)
    b = random_shift_point(np.random.default_rng(7), 50)
    assert a == b
    t = truncation(a, 8)
    assert t.window(16) == a.window(8) * 2
    xs = tent_generic_orbit(100, np.random.default_rng(1))
    assert all(0 <= p.value <= 1 for p in xs)
    # consecutive points follow the tent map up to float error
    assert all(abs(T.value(p.value) - q.value) < 1e-6 for p, q in zip(xs, xs[1:]))


def test_logistic_float():
    f = logistic(4.0)
    assert f.value(0.5) == 1.0
