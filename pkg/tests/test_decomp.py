from fractions import Fraction as F

import numpy as np
import pytest

from morbit.dynsys import IntervalPoint, iterate, logistic, orbit, swap_map, tent
from morbit.errors import CapExceededError, NotPeriodicError, ValidationError
from morbit.decomp import (
    PeriodicDecomposition, amplification_bound, lift_report, lift_witness, merge_intervals,
    power_level_cost, power_periodic_points, subtract, verify_decomposition,
)
from morbit.periodic import interval_periodic_points
from morbit.pseudometric import ebar_finite

G = swap_map()
T = tent()
I = IntervalPoint
HALVES = PeriodicDecomposition.split(F(1, 2))


def test_interval_helpers():
    assert merge_intervals([(0, 1), (F(1, 2), 2), (3, 4)]) == [(0, 2), (3, 4)]
    assert subtract((0, 1), [(0, F(1, 2))]) == [(F(1, 2), 1)]
    assert subtract((0, 1), [(0, F(1, 4)), (F(1, 2), 1)]) == [(F(1, 4), F(1, 2))]
    assert subtract((F(1, 3), F(1, 3)), [(0, F(1, 4))]) == [(F(1, 3), F(1, 3))]
    assert subtract((0, 1), [(0, 1)]) == []


def test_trivial_decomposition():
    d = PeriodicDecomposition(1, (((0, 1),),))
    for f in (T, G):
        assert verify_decomposition(f, d).valid


def test_swap_map_decomposition():
    rep = verify_decomposition(G, HALVES)
    assert rep.valid and rep.exact and rep.covers
    assert rep.images == [[(F(1, 2), 1)], [(0, F(1, 2))]]


def test_tent_rejected():
    rep = verify_decomposition(T, HALVES)
    assert not rep.valid and rep.exact
    assert rep.images[0] == [(0, 1)]
    assert (0, 0, F(1, 2)) in rep.violations


def test_non_cover_reported():
    d = PeriodicDecomposition(2, (((0, F(1, 4)),), ((F(1, 2), 1),)))
    rep = verify_decomposition(G, d)
    assert not rep.covers and rep.uncovered == [(F(1, 4), F(1, 2))]


def test_sampled_decomposition_flagged():
    d = PeriodicDecomposition(1, (((0, 1),),))
    rep = verify_decomposition(logistic(4.0), d)
    assert rep.valid and not rep.exact


def test_decomposition_validation():
    with pytest.raises(ValidationError):
        PeriodicDecomposition(2, (((0, 1),),))
    with pytest.raises(ValidationError):
        PeriodicDecomposition(1, (((0, 2),),))
    with pytest.raises(ValidationError):
        PeriodicDecomposition(1, ((),))


def test_lift_examples():
    x = I(F(1, 6))
    assert orbit(G, x, 3) == [x, I(F(5, 6)), x]
    assert lift_witness(G, HALVES, x, x, 1) == 0
    [pt] = [p for p in power_periodic_points(G, HALVES, 1) if not p.boundary]
    z = I(pt.value)
    assert lift_witness(G, HALVES, z, z, 1) == 0 and pt.period == 2


def test_swap_power_points_double_period():
    for p in range(1, 7):
        pts = power_periodic_points(G, HALVES, p)
        assert pts
        for pt in pts:
            x = I(pt.value)
            assert iterate(G, x, 2 * p) == x
            if not pt.boundary:
                assert pt.period == 2 * pt.power_period
            else:
                assert pt.value == F(1, 2)


def test_swap_square_on_d0_is_tent_like():
    g2 = [iterate(G, I(F(k, 64)), 2).value for k in range(33)]
    # g² maps [0,1/2] onto itself with slopes ±2: a rescaled tent map
    assert min(g2) == 0 and max(g2) == F(1, 2)
    slopes = {(b - a) * 64 for a, b in zip(g2, g2[1:])}
    assert slopes == {2, -2}


def test_lift_near_generic():
    # periodic x near a long g²-orbit segment of y: direct cost vs amplification bound
    rng = np.random.default_rng(0)
    pts = [p for p in power_periodic_points(G, HALVES, 6) if p.power_period == 6]
    x = I(pts[int(rng.integers(len(pts)))].value)
    y = I(F(int(rng.integers(1, 1000)), 2003))
    rep = lift_report(G, HALVES, x, y, 6)
    assert rep.lifted_cost <= rep.induced_cost <= rep.amplification_bound
    assert rep.consistent
    assert rep.power_cost == power_level_cost(G, x, y, 6, 2)


def test_lift_k1_is_ebar():
    d = PeriodicDecomposition(1, (((0, 1),),))
    for o in interval_periodic_points(T, 4):
        y = I(F(3, 17))
        n = o.period
        assert lift_witness(T, d, o.base, y, n) == ebar_finite(T, o.base, y, n)


def test_lift_errors():
    with pytest.raises(ValidationError):
        lift_witness(G, HALVES, I(F(3, 4)), I(F(1, 4)), 2)  # x not in D_0
    with pytest.raises(NotPeriodicError):
        lift_witness(G, HALVES, I(F(1, 7)), I(F(1, 4)), 1)
    with pytest.raises(CapExceededError):
        lift_witness(G, HALVES, I(F(1, 6)), I(F(1, 4)), 600)


def test_amplification_bound():
    assert amplification_bound(F(2), 2, F(1, 8)) == (F(1, 8) + F(1, 4)) / 2
    assert amplification_bound(F(4), 3, F(1, 2)) == (F(1, 2) + 1 + 1) / 3
