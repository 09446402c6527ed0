"""Asymptotic average pseudo-orbits: block construction, diagnostics and tracing costs.

A block schedule lists stages ``n = 1..S``.  Stage n carries a target
measure ``μ_n``, ``p_n`` generic points ``y^n_1..y^n_{p_n}`` and a block
length ``q_n``.  The pseudo-orbit walks stage n as ``p_{n+1} q_{n+1}``
rounds; each round visits the ``p_n`` generic points in order and follows
each for ``q_n`` steps, so index ``i`` decomposes uniquely as

    i = Q_{n-1} + k p_n q_n + j q_n + r,   k < p_{n+1} q_{n+1}, j < p_n, r < q_n

and ``x_i = T^r y^n_{j+1}``.  The final stage has no successor; its round
count is the schedule's ``tail_repeats``.
"""
from __future__ import annotations

import itertools
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .dynsys import (
    DiscreteMeasure,
    Point,
    Real,
    System,
    as_threshold,
    orbit,
)
from .errors import CapExceededError, ValidationError
from .pseudometric import (
    DEFAULT_BINS,
    DEFAULT_CYLINDER,
    coarsening_bound,
    sequence_cost,
    snapshots,
)
from .transport import gamma, w1_discrete

TRACE_CAP = 1024
RAW_SUPPORT_CAP = 512

MODES = ("strict", "relaxed")


# --------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class BlockStage:
    measure: DiscreteMeasure
    generic_points: tuple
    q: int
    eps: Real | None = None  # only used for the last stage (others are derived)

    def __post_init__(self):
        object.__setattr__(self, "generic_points", tuple(self.generic_points))
        if not isinstance(self.measure, DiscreteMeasure):
            raise ValidationError("stage measure must be a DiscreteMeasure")
        if not self.generic_points:
            raise ValidationError("stage needs at least one generic point")
        if int(self.q) != self.q or self.q < 1:
            raise ValidationError(f"block length q must be a positive integer, got {self.q!r}")
        if self.eps is not None:
            object.__setattr__(self, "eps", as_threshold(self.eps))
            if self.eps <= 0:
                raise ValidationError("stage eps must be positive")

    @property
    def p(self) -> int:
        return len(self.generic_points)


@dataclass(frozen=True)
class BlockSchedule:
    stages: tuple
    mode: str = "relaxed"
    tail_repeats: int = 1

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if not self.stages:
            raise ValidationError("schedule needs at least one stage")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if int(self.tail_repeats) != self.tail_repeats or self.tail_repeats < 1:
            raise ValidationError("tail_repeats must be a positive integer")
        for s in self.stages:
            if not isinstance(s, BlockStage):
                raise ValidationError("stages must be BlockStage instances")

    @property
    def S(self) -> int:
        return len(self.stages)

    def p(self, n: int) -> int:
        return self.stages[n - 1].p

    def q(self, n: int) -> int:
        return self.stages[n - 1].q

    def rounds(self, n: int) -> int:
        """``p_{n+1} q_{n+1}``, or ``tail_repeats`` for the last stage."""
        if n < self.S:
            return self.p(n + 1) * self.q(n + 1)
        return self.tail_repeats

    def P(self, n: int) -> int:
        return self.p(n) * self.q(n) * self.rounds(n)

    def Q(self, n: int) -> int:
        return sum(self.P(i) for i in range(1, n + 1))

    @property
    def length(self) -> int:
        return self.Q(self.S)

    def decompose(self, i: int) -> tuple[int, int, int, int]:
        """``(n, k, j, r)`` with ``i = Q_{n-1} + k p_n q_n + j q_n + r``."""
        if not 0 <= i < self.length:
            raise ValidationError(f"index {i} outside schedule of length {self.length}")
        base = 0
        for n in range(1, self.S + 1):
            P = self.P(n)
            if i < base + P:
                off = i - base
                pq = self.p(n) * self.q(n)
                k, rest = divmod(off, pq)
                j, r = divmod(rest, self.q(n))
                return n, k, j, r
            base += P
        raise AssertionError("unreachable")


def chain_eps(system: System, schedule: BlockSchedule, exact: bool | None = None) -> list:
    """``ε_n = γ(μ_n, μ_{n+1})`` for n < S; the last stage uses its own eps or ε_{S-1}."""
    out = []
    st = schedule.stages
    for n in range(len(st) - 1):
        out.append(gamma(st[n].measure, st[n + 1].measure, system, exact=exact))
    last = st[-1].eps
    if last is None:
        last = out[-1] if out else None
    out.append(last)
    return out


def stage_mixture(system: System, stage: BlockStage) -> DiscreteMeasure:
    """``(1/p_n) Σ_j m_T(y^n_j, q_n)`` as one discrete measure."""
    counts: Counter = Counter()
    for y in stage.generic_points:
        counts.update(orbit(system, y, stage.q))
    total = stage.p * stage.q
    keys = list(counts)
    return DiscreteMeasure(tuple(keys), tuple(Fraction(counts[k], total) for k in keys))


@dataclass
class ScheduleReport:
    valid: bool
    mode: str
    strict_ok: bool
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    P: tuple = ()
    Q: tuple = ()
    eps: tuple = ()
    certified_gamma: tuple = ()


def schedule_validate(system: System, schedule: BlockSchedule,
                      exact: bool | None = None, certify: bool = True) -> ScheduleReport:
    """Growth inequalities, Q-arithmetic and generic-point certification.

    Growth conditions ``p_{n+1} >= 2^n p_n q_n`` and ``q_{n+1} >= 2 p_{n+1}``
    are hard violations in strict mode and warnings in relaxed mode.  The
    certification ``γ(μ_n, (1/p_n) Σ_j m_T(y^n_j, q_n)) < ε_n`` is computed
    with the flow solver and follows the same strict/relaxed rule.
    """
    S = schedule.S
    for st in schedule.stages:
        for y in st.generic_points:
            system.check_point(y)
        for x in st.measure.support:
            system.check_point(x)
    growth = []
    for n in range(1, S):
        p, q = schedule.p(n), schedule.q(n)
        p1, q1 = schedule.p(n + 1), schedule.q(n + 1)
        if p1 < 2 ** n * p * q:
            growth.append(f"stage {n}: p_{n + 1}={p1} < 2^{n}*p_{n}*q_{n}={2 ** n * p * q}")
        if q1 < 2 * p1:
            growth.append(f"stage {n}: q_{n + 1}={q1} < 2*p_{n + 1}={2 * p1}")
    P = tuple(schedule.P(n) for n in range(1, S + 1))
    Q = tuple(itertools.accumulate(P))
    hard = []
    if any(b <= a for a, b in zip((0,) + Q, Q)):
        hard.append("Q_n is not strictly increasing")
    eps = chain_eps(system, schedule, exact)
    certs = []
    soft_cert = []
    if certify:
        for n, st in enumerate(schedule.stages, start=1):
            g = w1_discrete(st.measure, stage_mixture(system, st), system, exact=exact)[0]
            certs.append(g)
            e = eps[n - 1]
            if e is not None and not g < e:
                soft_cert.append(f"stage {n}: certification gamma {g} >= eps_{n} {e}")
            if e is not None and e == 0:
                soft_cert.append(f"stage {n}: eps_{n} = 0 (consecutive measures coincide)")
    strict_ok = not growth and not soft_cert
    if schedule.mode == "strict":
        violations = hard + growth + soft_cert
        warnings = []
    else:
        violations = hard
        warnings = growth + soft_cert
    return ScheduleReport(not violations, schedule.mode, strict_ok, violations, warnings,
                          P, Q, tuple(eps), tuple(certs))


# --------------------------------------------------------------------------
# construction


@dataclass(frozen=True)
class PseudoOrbitSeq:
    points: tuple
    schedule: BlockSchedule | None
    jump_averages: tuple  # [N] = (1/N) Σ_{i<N} d(T x_i, x_{i+1}); [0] = 0 by convention

    def __len__(self):
        return len(self.points)


def jumps(system: System, seq: Sequence) -> list:
    """``d(T x_i, x_{i+1})`` for ``i < len(seq) - 1``."""
    return [system.dist(system.apply(a), b) for a, b in zip(seq, seq[1:])]


def jump_averages(system: System, seq: Sequence) -> tuple:
    out = [Fraction(0)]
    total = 0
    for N, d in enumerate(jumps(system, seq), start=1):
        total += d
        out.append(total / N)
    return tuple(out)


def build_aapo(system: System, schedule: BlockSchedule, horizon: int | None = None,
               validate: bool = True) -> PseudoOrbitSeq:
    """Concatenate orbit blocks of the generic points following the schedule."""
    if validate:
        rep = schedule_validate(system, schedule)
        if not rep.valid:
            raise ValidationError("; ".join(rep.violations))
    L = schedule.length
    if horizon is None:
        horizon = L
    if not 1 <= horizon <= L:
        raise ValidationError(f"horizon {horizon} exceeds schedule length Q_S = {L}")
    pts: list = []
    for n, st in enumerate(schedule.stages, start=1):
        segs = [orbit(system, y, st.q) for y in st.generic_points]
        for _ in range(schedule.rounds(n)):
            for seg in segs:
                pts.extend(seg)
            if len(pts) >= horizon:
                break
        if len(pts) >= horizon:
            break
    pts = pts[:horizon]
    return PseudoOrbitSeq(tuple(pts), schedule, jump_averages(system, pts))


def prefix_bound(schedule: BlockSchedule, N: int) -> Fraction:
    """Jump-count bound ``(1/N)(Σ_{i<n} p_i p_{i+1} q_{i+1} + (k+1) p_n)`` for diameter-1 spaces.

    Every jump lands on a block start and costs at most the diameter; the
    numerator counts the block starts among positions ``1..N``.
    """
    if N < 1:
        raise ValidationError("prefix length must be >= 1")
    n, k, _, _ = schedule.decompose(N) if N < schedule.length else (
        schedule.S, schedule.rounds(schedule.S), 0, 0)
    earlier = sum(schedule.p(i) * schedule.rounds(i) for i in range(1, n))
    return Fraction(earlier + (k + 1) * schedule.p(n), N)


def check_prefix_bound(seq: PseudoOrbitSeq) -> list[int]:
    """Prefix lengths N at which the computed jump average exceeds the bound (empty = holds)."""
    if seq.schedule is None:
        raise ValidationError("sequence carries no schedule")
    return [N for N in range(1, len(seq.points))
            if seq.jump_averages[N] > prefix_bound(seq.schedule, N)]


# --------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class AAPOReport:
    horizons: tuple
    averages: tuple
    threshold: Real
    below_threshold: bool
    decreasing: bool


def _check_horizons(horizons, limit: int) -> list[int]:
    hs = [int(h) for h in horizons]
    if not hs or hs[0] < 1 or any(a >= b for a, b in zip(hs, hs[1:])):
        raise ValidationError("horizons must be strictly increasing positive integers")
    if hs[-1] > limit:
        raise ValidationError(f"horizon {hs[-1]} beyond available length {limit}")
    return hs


def is_aapo(system: System, seq: Sequence, horizons: Sequence[int], threshold=0.02) -> AAPOReport:
    """Average one-step error at each horizon; verdict is ``final < threshold``.

    A horizon N needs ``x_N``, so N ranges up to ``len(seq) - 1``.
    """
    hs = _check_horizons(horizons, len(seq) - 1)
    thr = as_threshold(threshold)
    js = jumps(system, seq[:hs[-1] + 1])
    avgs = []
    total = 0
    done = 0
    for h in hs:
        total += sum(js[done:h])
        done = h
        avgs.append(total / h)
    dec = all(b <= a for a, b in zip(avgs, avgs[1:]))
    return AAPOReport(tuple(hs), tuple(avgs), thr, avgs[-1] < thr, dec)


def subsample_horizons(horizons: Sequence[int], cap: int = TRACE_CAP) -> list[int]:
    """Drop horizons above the assignment cap (they are skipped, never approximated)."""
    return [h for h in horizons if h <= cap]


@dataclass(frozen=True)
class TraceReport:
    horizons: tuple
    costs: tuple
    identity_costs: tuple


def trace_error(system: System, seq: Sequence, x: Point, horizons: Sequence[int],
                cap: int = TRACE_CAP, exact: bool | None = None, method: str = "auto",
                mapper=map) -> TraceReport:
    """``min_σ (1/n) Σ d(x_i, T^{σ(i)} x)`` at each horizon, plus the identity-matching cost."""
    hs = _check_horizons(horizons, len(seq))
    if hs[-1] > cap:
        raise CapExceededError(f"horizon {hs[-1]} exceeds trace cap {cap}; use subsample_horizons")
    orb = orbit(system, x, hs[-1])
    costs = tuple(mapper(lambda h: sequence_cost(system, seq[:h], orb[:h], exact, method, cap), hs))
    ident = tuple(identity_cost(system, seq[:h], orb[:h]) for h in hs)
    return TraceReport(tuple(hs), costs, ident)


def identity_cost(system: System, xs: Sequence, ys: Sequence) -> Real:
    """``(1/n) Σ d(xs[i], ys[i])``, the cost of the identity matching."""
    if len(xs) != len(ys) or not xs:
        raise ValidationError("identity cost needs two nonempty equal-length sequences")
    return sum(system.dist(a, b) for a, b in zip(xs, ys)) / len(xs)


def sequence_measure(seq: Sequence, n: int | None = None) -> DiscreteMeasure:
    """``m(seq, n) = (1/n) Σ_{i<n} δ_{seq[i]}`` with duplicates merged."""
    n = len(seq) if n is None else n
    if not 1 <= n <= len(seq):
        raise ValidationError(f"prefix {n} outside sequence of length {len(seq)}")
    counts = Counter(seq[:n])
    keys = list(counts)
    return DiscreteMeasure(tuple(keys), tuple(Fraction(counts[k], n) for k in keys))


def prefix_distance(system: System, a: Sequence, b: Sequence, n: int,
                    exact: bool | None = None, cap: int = TRACE_CAP) -> Real:
    """``γ(m(a,n), m(b,n))``: an assignment for ``n <= cap``, a transport problem beyond."""
    if n <= cap:
        return sequence_cost(system, a[:n], b[:n], exact, "auto", cap)
    return gamma(sequence_measure(a, n), sequence_measure(b, n), system, exact=exact)


# --------------------------------------------------------------------------
# finite-scale transfer statements


@dataclass(frozen=True)
class TransferReport:
    checkpoints: tuple
    values: tuple  # γ(m(a,n), m(b,n))
    cross: tuple  # γ between coarsened snapshots of a and b at n
    coarsening_error: Fraction
    tau: Real
    premise: bool  # all values < tau
    conclusion: bool  # all cross < tau + 2·coarsening error
    cross_consistent: bool  # cross[n] <= values[n] + 2·coarsening error, always
    pairwise_consistent: bool  # |g_a(n,n') - g_b(n,n')| <= cross[n] + cross[n']

    @property
    def holds(self) -> bool:
        return self.cross_consistent and self.pairwise_consistent and (
            self.conclusion or not self.premise)


def vset_transfer_check(seq_a: Sequence, seq_b: Sequence, system: System,
                        checkpoints: Sequence[int], tau, bins: int = DEFAULT_BINS,
                        cylinder: int = DEFAULT_CYLINDER, exact: bool | None = None,
                        cap: int = TRACE_CAP) -> TransferReport:
    """If the two sequences are close in min-permutation cost at every checkpoint,
    their empirical snapshots are close there too."""
    if len(seq_a) != len(seq_b):
        raise ValidationError("sequences must have equal length")
    cps = _check_horizons(checkpoints, len(seq_a))
    tau = as_threshold(tau)
    values = tuple(prefix_distance(system, seq_a, seq_b, n, exact, cap) for n in cps)
    sa = snapshots(system, seq_a, cps, bins, cylinder)
    sb = snapshots(system, seq_b, cps, bins, cylinder)
    err = coarsening_bound(system, bins, cylinder)
    cross = tuple(gamma(a, b, system, exact=exact) for a, b in zip(sa, sb))
    slack = 1e-12 if not all(isinstance(v, Fraction) for v in values + cross) else 0
    cross_ok = all(c <= v + 2 * err + slack for c, v in zip(cross, values))
    pair_ok = True
    for i in range(len(cps)):
        for j in range(i + 1, len(cps)):
            ga = gamma(sa[i], sa[j], system, exact=exact)
            gb = gamma(sb[i], sb[j], system, exact=exact)
            if abs(ga - gb) > cross[i] + cross[j] + slack:
                pair_ok = False
    premise = all(v < tau for v in values)
    conclusion = all(c < tau + 2 * err for c in cross)
    return TransferReport(tuple(cps), values, cross, err, tau, premise, conclusion,
                          cross_ok, pair_ok)


@dataclass(frozen=True)
class CommonLimitReport:
    horizons: tuple
    gamma_a: tuple
    gamma_b: tuple
    costs: tuple
    tau: Real
    premise: tuple  # per horizon: both snapshots within tau of mu
    holds: bool  # cost <= 2 tau wherever the premise holds, and cost <= gamma_a + gamma_b


def common_limit_check(system: System, seq_a: Sequence, seq_b: Sequence, mu: DiscreteMeasure,
                       horizons: Sequence[int], tau, exact: bool | None = None,
                       cap: int = TRACE_CAP) -> CommonLimitReport:
    """Two sequences whose late snapshots sit within τ of one measure are within 2τ."""
    hs = _check_horizons(horizons, min(len(seq_a), len(seq_b)))
    tau = as_threshold(tau)
    ga, gb, costs, prem = [], [], [], []
    ok = True
    for n in hs:
        a = gamma(sequence_measure(seq_a, n), mu, system, exact=exact)
        b = gamma(sequence_measure(seq_b, n), mu, system, exact=exact)
        c = prefix_distance(system, seq_a, seq_b, n, exact, cap)
        slack = 0 if all(isinstance(v, Fraction) for v in (a, b, c)) else 1e-12
        p = a <= tau and b <= tau
        if c > a + b + slack or (p and c > 2 * tau + slack):
            ok = False
        ga.append(a)
        gb.append(b)
        costs.append(c)
        prem.append(p)
    return CommonLimitReport(tuple(hs), tuple(ga), tuple(gb), tuple(costs), tau, tuple(prem), ok)


@dataclass(frozen=True)
class ChainRow:
    n: int
    Q: int
    eps: Real | None
    bound: Real | None  # 2 ε_n + 2 Q_{n-1} / Q_n
    raw_gamma: Real | None  # exact, when the snapshot support is small enough
    coarse_gamma: Real
    coarsening_error: Fraction
    holds: bool


def chain_realization(system: System, seq: PseudoOrbitSeq, bins: int = DEFAULT_BINS,
                      cylinder: int = DEFAULT_CYLINDER, exact: bool | None = None,
                      raw_support_cap: int = RAW_SUPPORT_CAP) -> list[ChainRow]:
    """``γ(μ_n, m(seq, Q_n))`` against ``2ε_n + 2Q_{n-1}/Q_n`` at every reached Q_n.

    The exact distance is used when ``m(seq, Q_n)`` has at most
    ``raw_support_cap`` atoms; otherwise the coarsened snapshot is compared
    against the bound widened by the coarsening error.
    """
    sch = seq.schedule
    if sch is None:
        raise ValidationError("sequence carries no schedule")
    eps = chain_eps(system, sch, exact)
    err = coarsening_bound(system, bins, cylinder)
    rows = []
    prevQ = 0
    for n in range(1, sch.S + 1):
        Qn = sch.Q(n)
        if Qn > len(seq.points):
            break
        mu = sch.stages[n - 1].measure
        e = eps[n - 1]
        bound = None if e is None else 2 * e + Fraction(2 * prevQ, Qn)
        m = sequence_measure(seq.points, Qn)
        raw = gamma(mu, m, system, exact=exact) if len(m) <= raw_support_cap else None
        coarse = gamma(mu, snapshots(system, seq.points, [Qn], bins, cylinder)[0], system,
                       exact=exact)
        if bound is None:
            holds = True
        elif raw is not None:
            holds = raw < bound
        else:
            holds = coarse < bound + err
        rows.append(ChainRow(n, Qn, e, bound, raw, coarse, err, holds))
        prevQ = Qn
    return rows


def symbol_stream(seq: Sequence) -> bytes:
    """Shift pseudo-orbit as one byte per step: the 0th symbol of each point."""
    out = bytearray()
    for p in seq:
        s = p.symbol(0)
        if s > 255:
            raise ValidationError("symbol does not fit in a byte")
        out.append(s)
    return bytes(out)
