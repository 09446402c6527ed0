"""Finite-horizon estimators for the mean orbital and Besicovitch pseudo-metrics."""
from __future__ import annotations

from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

from .dynsys import (
    CirclePoint,
    DiscreteMeasure,
    IntervalPoint,
    Point,
    Real,
    ShiftPoint,
    System,
    orbit,
)
from .errors import ValidationError
from .transport import ASSIGNMENT_CAP, assignment_cost, cost_matrix, gamma

DEFAULT_BINS = 64
DEFAULT_CYLINDER = 6


def sequence_cost(system: System, xs: Sequence, ys: Sequence, exact: bool | None = None,
                  method: str = "auto", max_n: int = ASSIGNMENT_CAP) -> Real:
    """``min_σ (1/n) Σ d(xs[i], ys[σ(i)])`` for two equal-length point lists."""
    if len(xs) != len(ys):
        raise ValidationError(f"sequence lengths differ ({len(xs)} vs {len(ys)})")
    c = cost_matrix(system, xs, ys, exact=exact)
    return assignment_cost(c, method=method, max_n=max_n)[0]


def ebar_finite(system: System, x: Point, y: Point, n: int, exact: bool | None = None,
                method: str = "auto") -> Real:
    """Min-permutation average distance between the first n orbit points of x and y."""
    return sequence_cost(system, orbit(system, x, n), orbit(system, y, n), exact, method)


def besicovitch_finite(system: System, x: Point, y: Point, n: int) -> Real:
    """``(1/n) Σ_{i<n} d(T^i x, T^i y)`` (identity matching only)."""
    xs, ys = orbit(system, x, n), orbit(system, y, n)
    total = sum(system.dist(a, b) for a, b in zip(xs, ys))
    return total / n


def _check_horizons(horizons) -> list[int]:
    hs = [int(h) for h in horizons]
    if not hs or hs[0] < 1 or any(a >= b for a, b in zip(hs, hs[1:])):
        raise ValidationError("horizons must be strictly increasing positive integers")
    return hs


def doubling_horizons(start: int, stop: int) -> list[int]:
    out = []
    h = start
    while h <= stop:
        out.append(h)
        h *= 2
    return out


@dataclass(frozen=True)
class EbarEstimate:
    horizons: tuple
    values: tuple
    limsup_estimate: Real
    tail_window: int

    def rows(self):
        return list(zip(self.horizons, self.values))


def ebar_estimate(system: System, x: Point, y: Point, horizons: Sequence[int],
                  tail_window: int = 3, exact: bool | None = None,
                  method: str = "auto", mapper=map) -> EbarEstimate:
    """Values at each horizon plus ``max`` over the last ``tail_window`` of them.

    ``mapper`` lets callers evaluate horizons concurrently (e.g. an
    executor's ``map``); results are assembled in horizon order.
    """
    hs = _check_horizons(horizons)
    if not 1 <= tail_window <= len(hs):
        raise ValidationError("tail_window must lie in [1, number of horizons]")
    xs, ys = orbit(system, x, hs[-1]), orbit(system, y, hs[-1])
    values = tuple(mapper(lambda h: sequence_cost(system, xs[:h], ys[:h], exact, method), hs))
    return EbarEstimate(tuple(hs), values, max(values[-tail_window:]), tail_window)


# --------------------------------------------------------------------------
# coarsened snapshots of empirical measures


def coarsen_point(p: Point, bins: int = DEFAULT_BINS, cylinder: int = DEFAULT_CYLINDER) -> Point:
    """Representative of the cell containing p (bin centre, or cylinder word + 0^∞)."""
    if isinstance(p, IntervalPoint):
        k = min(int(p.value * bins), bins - 1)
        rep = Fraction(2 * k + 1, 2 * bins)
        return IntervalPoint(rep if p.exact else float(rep))
    if isinstance(p, CirclePoint):
        k = min(int(p.angle * bins), bins - 1)
        rep = Fraction(2 * k + 1, 2 * bins)
        return CirclePoint(rep if p.exact else float(rep))
    if isinstance(p, ShiftPoint):
        return ShiftPoint(p.window(cylinder), (0,), p.alphabet)
    raise ValidationError(f"cannot coarsen {p!r}")


def coarsening_bound(system: System, bins: int = DEFAULT_BINS,
                     cylinder: int = DEFAULT_CYLINDER) -> Fraction:
    """Upper bound on ``d(p, coarsen_point(p))`` and hence on the snapshot error."""
    if system.space == "interval":
        return Fraction(1, 2 * bins)
    if system.space == "circle":
        return Fraction(1, bins)  # doubled arc metric
    return Fraction(1, 2 ** cylinder)


@dataclass(frozen=True)
class MeasureLimitSetEstimate:
    checkpoints: tuple
    snapshots: tuple  # DiscreteMeasure per checkpoint
    pairwise_gamma: tuple  # symmetric matrix as nested tuples
    coarsening_error: Fraction


def snapshots(system: System, seq: Sequence, checkpoints: Sequence[int],
              bins: int = DEFAULT_BINS, cylinder: int = DEFAULT_CYLINDER) -> list[DiscreteMeasure]:
    """Coarsened empirical measures ``m(seq, n)`` at each checkpoint n."""
    cps = _check_horizons(checkpoints)
    if cps[-1] > len(seq):
        raise ValidationError("checkpoint beyond sequence length")
    reps = [coarsen_point(p, bins, cylinder) for p in seq[:cps[-1]]]
    out = []
    counts: Counter = Counter()
    done = 0
    for n in cps:
        counts.update(reps[done:n])
        done = n
        keys = sorted(counts, key=repr)
        out.append(DiscreteMeasure(tuple(keys), tuple(Fraction(counts[k], n) for k in keys)))
    return out


def sequence_vset(system: System, seq: Sequence, checkpoints: Sequence[int],
                  bins: int = DEFAULT_BINS, cylinder: int = DEFAULT_CYLINDER,
                  exact: bool | None = None) -> MeasureLimitSetEstimate:
    cps = _check_horizons(checkpoints)
    snaps = snapshots(system, seq, cps, bins, cylinder)
    k = len(snaps)
    g = [[Fraction(0)] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            g[i][j] = g[j][i] = gamma(snaps[i], snaps[j], system, exact=exact)
    return MeasureLimitSetEstimate(tuple(cps), tuple(snaps), tuple(map(tuple, g)),
                                   coarsening_bound(system, bins, cylinder))


def vset_estimate(system: System, x: Point, checkpoints: Sequence[int],
                  coarsen_bins: int = DEFAULT_BINS, cylinder: int = DEFAULT_CYLINDER,
                  exact: bool | None = None) -> MeasureLimitSetEstimate:
    """Snapshots of ``m_T(x, n)`` at the checkpoints with their pairwise distances."""
    cps = _check_horizons(checkpoints)
    return sequence_vset(system, orbit(system, x, cps[-1]), cps, coarsen_bins, cylinder, exact)
