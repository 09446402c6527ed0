from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from morbit.dynsys import DiscreteMeasure, FullShift, IntervalPoint, ShiftPoint, orbit, tent
from morbit.errors import CapExceededError, ValidationError
from morbit.periodic import periodic_orbit
from morbit.shadowing import (
    BlockSchedule, BlockStage, PseudoOrbitSeq, build_aapo, chain_eps, chain_realization,
    check_prefix_bound, common_limit_check, identity_cost, is_aapo, jump_averages, jumps,
    prefix_bound, schedule_validate, sequence_measure, subsample_horizons, symbol_stream,
    trace_error, vset_transfer_check,
)
from morbit.transport import gamma

T = tent()
SHIFT = FullShift(2)
I = IntervalPoint
ZERO, ONE = ShiftPoint("", "0"), ShiftPoint("", "1")
MU_25 = periodic_orbit(T, I(F(2, 5))).measure
DELTA_23 = DiscreteMeasure.dirac(I(F(2, 3)))


def shift_stage(zeros, ones, q, eps=None):
    pts = (ZERO,) * zeros + (ONE,) * ones
    return BlockStage(DiscreteMeasure.uniform(pts), pts, q, eps)


def test_schedule_strict_valid():
    s = BlockSchedule((shift_stage(1, 1, 4), shift_stage(12, 4, 32)), mode="strict")
    rep = schedule_validate(SHIFT, s)
    assert rep.valid and rep.strict_ok and not rep.violations
    assert rep.eps == (F(1, 4), F(1, 4))
    assert rep.certified_gamma == (0, 0)


def test_schedule_strict_invalid_relaxed_warns():
    stages = (shift_stage(1, 1, 4), shift_stage(6, 2, 32))
    strict = schedule_validate(SHIFT, BlockSchedule(stages, mode="strict"))
    assert not strict.valid and any("p_2=8 < 2^1*p_1*q_1=16" in v for v in strict.violations)
    relaxed = schedule_validate(SHIFT, BlockSchedule(stages, mode="relaxed"))
    assert relaxed.valid and relaxed.warnings and not relaxed.strict_ok


def test_schedule_single_stage():
    s = BlockSchedule((shift_stage(1, 1, 2, eps=F(1, 8)),), mode="strict")
    assert schedule_validate(SHIFT, s).valid


def test_schedule_failed_certification():
    # generic point 1^∞ does not represent μ = δ_0 at all
    bad = BlockStage(DiscreteMeasure.dirac(ZERO), (ONE,), 2, eps=F(1, 2))
    rep = schedule_validate(SHIFT, BlockSchedule((bad,), mode="strict"))
    assert not rep.valid and rep.certified_gamma == (1,)
    assert schedule_validate(SHIFT, BlockSchedule((bad,))).valid


def test_schedule_arithmetic():
    s = BlockSchedule((shift_stage(1, 1, 4), shift_stage(12, 4, 32)), tail_repeats=3)
    assert s.P(1) == 2 * 4 * 16 * 32 and s.P(2) == 16 * 32 * 3
    assert s.length == s.Q(2) == s.P(1) + s.P(2)
    i = s.P(1) + 2 * 16 * 32 + 5 * 32 + 7
    assert s.decompose(i) == (2, 2, 5, 7)
    assert s.decompose(0) == (1, 0, 0, 0)
    with pytest.raises(ValidationError):
        s.decompose(s.length)


@given(st.integers(1, 3), st.integers(1, 4), st.integers(1, 3), st.integers(1, 4),
       st.integers(1, 3))
def test_decompose_roundtrip(p1, q1, p2, q2, tail):
    s = BlockSchedule((shift_stage(p1, 0, q1), shift_stage(0, p2, q2)), tail_repeats=tail)
    for i in range(s.length):
        n, k, j, r = s.decompose(i)
        assert i == s.Q(n - 1) + k * s.p(n) * s.q(n) + j * s.q(n) + r
        assert 0 <= j < s.p(n) and 0 <= r < s.q(n) and 0 <= k < s.rounds(n)


def test_build_aapo_true_orbit():
    s = BlockSchedule((BlockStage(MU_25, (I(F(2, 5)),), 4, eps=F(1, 10)),), tail_repeats=5)
    seq = build_aapo(T, s)
    assert len(seq) == 20
    assert seq.points == tuple(orbit(T, I(F(2, 5)), 20))
    assert all(v == 0 for v in seq.jump_averages)


def test_build_aapo_two_tent_measures():
    stages = (BlockStage(MU_25, (I(F(2, 5)),), 20), BlockStage(DELTA_23, (I(F(2, 3)),), 20),
              BlockStage(MU_25, (I(F(2, 5)),), 40, eps=F(1, 10)))
    s = BlockSchedule(stages, tail_repeats=10)
    seq = build_aapo(T, s)
    assert len(seq) == s.length <= 10 ** 5
    rep = is_aapo(T, seq.points, [len(seq) - 1])
    assert rep.averages[-1] < 0.02
    assert rep.averages[-1] == seq.jump_averages[-1]


def test_build_aapo_horizon_and_validation():
    s = BlockSchedule((shift_stage(1, 1, 2), shift_stage(1, 1, 2)), mode="strict")
    with pytest.raises(ValidationError):
        build_aapo(SHIFT, s)  # coinciding measures: eps = 0 and growth fails
    seq = build_aapo(SHIFT, BlockSchedule(s.stages), horizon=7)
    assert len(seq) == 7
    with pytest.raises(ValidationError):
        build_aapo(SHIFT, BlockSchedule(s.stages), horizon=10 ** 6)


def test_strict_micro_prefix_bound():
    s = BlockSchedule((shift_stage(1, 0, 2), shift_stage(2, 2, 8, eps=F(1, 8))),
                      mode="strict", tail_repeats=2)
    rep = schedule_validate(SHIFT, s)
    assert rep.valid
    seq = build_aapo(SHIFT, s)
    assert check_prefix_bound(seq) == []
    for N in range(1, len(seq)):
        assert seq.jump_averages[N] <= prefix_bound(s, N)


def test_relaxed_micro_prefix_bound():
    # the literal (1,2),(2,4) micro-schedule fails the growth inequalities but the
    # jump-count bound is arithmetic and still holds at every prefix
    s = BlockSchedule((shift_stage(1, 0, 2), shift_stage(1, 1, 4, eps=F(1, 8))),
                      mode="relaxed", tail_repeats=2)
    rep = schedule_validate(SHIFT, s)
    assert rep.valid and rep.warnings
    assert check_prefix_bound(build_aapo(SHIFT, s)) == []


def test_is_aapo_examples():
    xs = orbit(T, I(F(1, 7)), 50)
    rep = is_aapo(T, xs, [10, 20, 49])
    assert all(v == 0 for v in rep.averages) and rep.below_threshold
    alt = [I(0), I(F(2, 3))] * 20
    rep = is_aapo(T, alt, [8, 16, 32])
    assert all(v == F(2, 3) for v in rep.averages) and not rep.below_threshold
    with pytest.raises(ValidationError):
        is_aapo(T, alt, [40])


def test_is_aapo_matches_jump_averages():
    s = BlockSchedule((BlockStage(MU_25, (I(F(2, 5)),), 3), BlockStage(DELTA_23, (I(F(2, 3)),), 5,
                                                                   eps=F(1, 10))),
                      tail_repeats=4)
    seq = build_aapo(T, s)
    hs = list(range(1, len(seq)))
    assert is_aapo(T, seq.points, hs).averages == seq.jump_averages[1:]
    assert seq.jump_averages == jump_averages(T, seq.points)
    assert len(jumps(T, seq.points)) == len(seq) - 1


def test_trace_examples():
    x = I(F(3, 11))
    xs = orbit(T, x, 60)
    assert all(v == 0 for v in trace_error(T, xs, x, [10, 30, 60]).costs)
    rev = [p for b in range(6) for p in reversed(xs[10 * b:10 * b + 10])]
    rep = trace_error(T, rev, x, [10, 20, 30, 40, 50, 60])
    assert all(v == 0 for v in rep.costs)
    assert all(c <= i for c, i in zip(rep.costs, rep.identity_costs))
    assert any(i > 0 for i in rep.identity_costs)


def test_trace_single_periodic_measure():
    stages = tuple(BlockStage(MU_25, (I(F(2, 5)),), q) for q in (3, 9, 27, 81))
    s = BlockSchedule(stages[:-1] + (BlockStage(MU_25, (I(F(2, 5)),), 81, eps=F(1, 10)),),
                      tail_repeats=1)
    seq = build_aapo(T, s, validate=False)
    hs = [s.Q(n) for n in range(1, s.S + 1) if s.Q(n) <= 1024]
    rep = trace_error(T, seq.points, I(F(2, 5)), hs)
    assert all(b <= a for a, b in zip(rep.costs, rep.costs[1:]))
    assert rep.costs[-1] < rep.costs[0]


def test_trace_cap():
    xs = orbit(T, I(F(1, 3)), 20)
    with pytest.raises(CapExceededError):
        trace_error(T, xs, I(F(1, 3)), [20], cap=10)
    assert subsample_horizons([5, 10, 20, 40], cap=10) == [5, 10]


def test_transfer_examples():
    xs = orbit(T, I(F(1, 9)), 48)
    rep = vset_transfer_check(xs, xs, T, [12, 24, 48], F(1, 100))
    assert all(v == 0 for v in rep.values) and rep.holds and rep.premise
    perm = [p for b in range(4) for p in reversed(xs[12 * b:12 * b + 12])]
    rep = vset_transfer_check(xs, perm, T, [12, 24, 48], F(1, 100))
    assert all(v == 0 for v in rep.values) and all(c == 0 for c in rep.cross) and rep.holds
    delta = F(1, 50)
    moved = [I(min(p.value + delta, F(1))) for p in xs]
    rep = vset_transfer_check(xs, moved, T, [12, 24, 48], F(1, 20))
    assert all(v <= delta for v in rep.values) and rep.holds and rep.conclusion


def test_transfer_far_sequences():
    a = [I(0)] * 16
    b = [I(1)] * 16
    rep = vset_transfer_check(a, b, T, [8, 16], F(1, 10))
    assert not rep.premise and rep.holds and rep.values == (1, 1)


def test_common_limit():
    xs = orbit(T, I(F(2, 5)), 40)
    ys = orbit(T, I(F(4, 5)), 40)
    rep = common_limit_check(T, xs, ys, MU_25, [10, 20, 40], F(1, 100))
    assert rep.holds and all(rep.premise) and all(c == 0 for c in rep.costs)
    zs = [I(F(2, 3))] * 40
    rep = common_limit_check(T, xs, zs, MU_25, [10, 20, 40], F(1, 100))
    assert rep.holds and not any(rep.premise)
    assert all(c <= a + b for c, a, b in zip(rep.costs, rep.gamma_a, rep.gamma_b))


def test_chain_realization_small():
    stages = (BlockStage(MU_25, (I(F(2, 5)),), 4), BlockStage(DELTA_23, (I(F(2, 3)),), 4),
              BlockStage(MU_25, (I(F(2, 5)),), 8, eps=F(1, 10)))
    s = BlockSchedule(stages, tail_repeats=4)
    seq = build_aapo(T, s)
    rows = chain_realization(T, seq)
    assert [r.Q for r in rows] == [s.Q(n) for n in (1, 2, 3)]
    eps = chain_eps(T, s)
    assert eps == [F(1, 5), F(1, 5), F(1, 10)]
    for r in rows:
        m = sequence_measure(seq.points, r.Q)
        assert r.raw_gamma == gamma(s.stages[r.n - 1].measure, m, T)
        assert r.holds and r.raw_gamma < r.bound
        assert abs(r.coarse_gamma - r.raw_gamma) <= r.coarsening_error


def test_identity_cost_and_measure():
    assert identity_cost(T, [I(0), I(1)], [I(1), I(1)]) == F(1, 2)
    m = sequence_measure([I(0), I(0), I(1)])
    assert m.mass(I(0)) == F(2, 3)


def test_symbol_stream():
    seq = [ShiftPoint("", "01"), ShiftPoint("", "10"), ShiftPoint("1", "0")]
    assert symbol_stream(seq) == bytes([0, 1, 1])


def test_stage_validation():
    with pytest.raises(ValidationError):
        BlockStage(MU_25, (), 3)
    with pytest.raises(ValidationError):
        BlockStage(MU_25, (I(0),), 0)
    with pytest.raises(ValidationError):
        BlockSchedule((BlockStage(MU_25, (I(0),), 1),), mode="loose")


def test_pseudo_orbit_len():
    assert len(PseudoOrbitSeq((I(0),), None, (0,))) == 1
