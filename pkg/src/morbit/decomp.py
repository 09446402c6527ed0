"""Periodic decompositions of interval maps and lifting witnesses from T^k to T.

A periodic decomposition is a closed cover ``D_0, ..., D_{k-1}`` of
[0, 1] with ``T(D_i) ⊆ D_{i+1 mod k}``.  Sets are finite unions of closed
rational intervals, so for piecewise-linear maps every check is exact.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dynsys import (
    IntervalPoint,
    PiecewiseLinear,
    Point,
    Real,
    System,
    as_real,
    iterate,
    iterate_map,
    least_period,
    orbit,
)
from .errors import CapExceededError, NotPeriodicError, ValidationError
from .periodic import fixed_points_of_iterate
from .pseudometric import sequence_cost
from .transport import ASSIGNMENT_CAP, assignment_cost, cost_matrix

LIFT_CAP = 1024
SAMPLES_PER_INTERVAL = 1025


def merge_intervals(ivs) -> list[tuple]:
    """Union of closed intervals as a sorted list of disjoint closed intervals."""
    out: list[list] = []
    for lo, hi in sorted(ivs):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [tuple(iv) for iv in out]


def subtract(iv: tuple, covered: Sequence[tuple]) -> list[tuple]:
    """Parts of the closed interval ``iv`` not covered by the disjoint closed ``covered``.

    The pieces are returned with closed endpoints for reporting; a piece
    ``(a, b)`` means the open gap between two covering intervals (or the
    interval ends) that still meets ``iv``.
    """
    lo, hi = iv
    gaps = []
    cur = lo
    for a, b in covered:
        if b < cur:
            continue
        if a > hi:
            break
        if a > cur:
            gaps.append((cur, a))
        cur = max(cur, b)
        if cur >= hi:
            break
    if cur < hi:
        gaps.append((cur, hi))
    # a degenerate iv = [c, c] outside every covering interval
    if lo == hi and not any(a <= lo <= b for a, b in covered):
        gaps = [(lo, hi)]
    return gaps


@dataclass(frozen=True)
class PeriodicDecomposition:
    k: int
    sets: tuple  # sets[i] = ((lo, hi), ...) closed rational intervals

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValidationError("k must be a positive integer")
        if len(self.sets) != self.k:
            raise ValidationError(f"need {self.k} sets, got {len(self.sets)}")
        norm = []
        for i, s in enumerate(self.sets):
            if not s:
                raise ValidationError(f"D_{i} is empty")
            ivs = []
            for iv in s:
                if len(iv) != 2:
                    raise ValidationError(f"D_{i}: intervals are [lo, hi] pairs")
                lo, hi = (Fraction(as_real(v)) if not isinstance(v, float) else Fraction(v)
                          for v in iv)
                if not 0 <= lo <= hi <= 1:
                    raise ValidationError(f"D_{i}: [{lo}, {hi}] is not a subinterval of [0,1]")
                ivs.append((lo, hi))
            norm.append(tuple(merge_intervals(ivs)))
        object.__setattr__(self, "sets", tuple(norm))

    def contains(self, i: int, v: Real) -> bool:
        return any(lo <= v <= hi for lo, hi in self.sets[i])

    @classmethod
    def split(cls, c) -> PeriodicDecomposition:
        """The two-piece candidate ``{[0, c], [c, 1]}``."""
        c = Fraction(as_real(c))
        return cls(2, (((0, c),), ((c, 1),)))


@dataclass
class DecompositionReport:
    valid: bool
    exact: bool  # False when images were only sampled
    covers: bool
    uncovered: list = field(default_factory=list)  # gaps in the union
    violations: list = field(default_factory=list)  # (i, lo, hi): part of T(D_i) outside D_{i+1}
    images: list = field(default_factory=list)  # merged images T(D_i)


def _sampled_image(system: System, lo, hi, samples: int) -> tuple:
    """Hull of the sampled values: the image of a closed interval is an interval."""
    ys = [system.value(float(x)) for x in np.linspace(float(lo), float(hi), samples)]
    return Fraction(min(ys)), Fraction(max(ys))


def verify_decomposition(system: System, d: PeriodicDecomposition,
                         samples: int = SAMPLES_PER_INTERVAL) -> DecompositionReport:
    """Check cover and cyclic containment; exact for piecewise-linear maps.

    Other interval maps are checked on ``samples`` points per interval and
    the report is flagged ``exact=False``.
    """
    if system.space != "interval":
        raise ValidationError("periodic decompositions are supported for interval maps only")
    exact = isinstance(system, PiecewiseLinear)
    union = merge_intervals([iv for s in d.sets for iv in s])
    uncovered = subtract((Fraction(0), Fraction(1)), union)
    violations = []
    images = []
    for i, s in enumerate(d.sets):
        target = d.sets[(i + 1) % d.k]
        img = []
        for lo, hi in s:
            if exact:
                img.extend(system.image_pieces(lo, hi))
            else:
                img.append(_sampled_image(system, lo, hi, samples))
        img = merge_intervals(img)
        images.append(img)
        for iv in img:
            for a, b in subtract(iv, target):
                violations.append((i, a, b))
    return DecompositionReport(not uncovered and not violations, exact, not uncovered,
                               uncovered, violations, images)


# --------------------------------------------------------------------------
# lifting


def _check_in(d: PeriodicDecomposition, p: Point, name: str):
    if not isinstance(p, IntervalPoint):
        raise ValidationError(f"{name} must be an interval point")
    if not d.contains(0, p.value):
        raise ValidationError(f"{name} = {p.value} is not in D_0")


def power_level_cost(system: System, x: Point, y: Point, n: int, k: int,
                     exact: bool | None = None) -> Real:
    """``min_σ (1/n) Σ_{i<n} d(T^{ki} x, T^{kσ(i)} y)`` (the witness cost for ``T^k``)."""
    xs = orbit(system, x, k * n)[::k]
    ys = orbit(system, y, k * n)[::k]
    return sequence_cost(system, xs, ys, exact)


def lift_witness(system: System, d: PeriodicDecomposition, x: Point, y: Point, n: int,
                 k: int | None = None, cap: int = LIFT_CAP, exact: bool | None = None) -> Real:
    """T-level cost ``min_{σ ∈ S_{kn}} (1/kn) Σ d(T^i x, T^{σ(i)} y)`` for ``T^{kn} x = x``."""
    k = d.k if k is None else k
    if k < 1 or n < 1:
        raise ValidationError("k and n must be positive")
    if k * n > cap:
        raise CapExceededError(f"k*n = {k * n} exceeds lift cap {cap}")
    _check_in(d, x, "x")
    _check_in(d, y, "y")
    if iterate(system, x, k * n) != x:
        raise NotPeriodicError(f"T^{k * n} x != x for x = {x.value}")
    return sequence_cost(system, orbit(system, x, k * n), orbit(system, y, k * n), exact)


@dataclass(frozen=True)
class LiftReport:
    k: int
    n: int
    power_cost: Real  # δ at the T^k level
    lifted_cost: Real  # optimal at the T level
    induced_cost: Real  # T-level cost of the matching induced by the optimal T^k matching
    amplification_bound: Real | None  # (1/k) Σ_{r<k} min(1, L^r δ), PL maps only

    @property
    def consistent(self) -> bool:
        ok = self.lifted_cost <= self.induced_cost
        if self.amplification_bound is not None:
            ok = ok and self.induced_cost <= self.amplification_bound
        return ok


def amplification_bound(lipschitz: Real, k: int, delta: Real) -> Real:
    """Upper bound ``(1/k) Σ_{r<k} min(1, L^r δ)`` on the induced T-level cost.

    Matching ``T^{ki+r} x`` with ``T^{kσ(i)+r} y`` costs at most
    ``min(1, L^r δ_i)`` where ``δ_i`` is the T^k-level distance of pair i;
    ``t ↦ min(1, c t)`` is concave, so averaging over i gives the bound at
    the mean ``δ``.
    """
    return sum(min(Fraction(1) if isinstance(delta, Fraction) else 1.0, lipschitz ** r * delta)
               for r in range(k)) / k


def lift_report(system: System, d: PeriodicDecomposition, x: Point, y: Point, n: int,
                k: int | None = None, cap: int = LIFT_CAP, exact: bool | None = None) -> LiftReport:
    """Compare the T^k-level witness cost with the directly computed T-level cost."""
    k = d.k if k is None else k
    lifted = lift_witness(system, d, x, y, n, k, cap, exact)
    xs = orbit(system, x, k * n)
    ys = orbit(system, y, k * n)
    c = cost_matrix(system, xs[::k], ys[::k], exact=exact)
    delta, perm = assignment_cost(c, max_n=max(ASSIGNMENT_CAP, n))
    induced = sum(system.dist(xs[k * i + r], ys[k * perm[i] + r])
                  for i in range(n) for r in range(k)) / (k * n)
    bound = None
    if isinstance(system, PiecewiseLinear):
        bound = amplification_bound(system.lipschitz, k, delta)
    return LiftReport(k, n, delta, lifted, induced, bound)


@dataclass(frozen=True)
class PowerPeriodicPoint:
    value: Fraction
    power_period: int  # least period under T^k
    period: int  # least period under T
    boundary: bool  # lies in D_0 ∩ D_j for some j != 0


def power_periodic_points(system: PiecewiseLinear, d: PeriodicDecomposition, p: int,
                          max_pieces: int = 1 << 16) -> list[PowerPeriodicPoint]:
    """Solutions of ``(T^k)^p x = x`` in D_0 with their least periods under T^k and T.

    Away from the shared boundary points, a T^k-periodic point of least
    period m in D_0 has least T-period ``k m``.
    """
    g = iterate_map(system, d.k, max_pieces)
    out = []
    for v in fixed_points_of_iterate(g, p, max_pieces):
        if not d.contains(0, v):
            continue
        x = IntervalPoint(v)
        m = least_period(g, x, p)
        t = least_period(system, x, d.k * p)
        boundary = any(d.contains(j, v) for j in range(1, d.k))
        out.append(PowerPeriodicPoint(v, m, t, boundary))
    return out
