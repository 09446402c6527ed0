"""State spaces, maps, the diameter-one metric, orbits and empirical measures.

Three kinds of state space are supported: the unit interval, the circle
R/Z, and the one-sided full shift on ``m`` symbols.  Every metric is
normalised so the space has diameter exactly 1.

Rational piecewise-linear interval maps are iterated in exact
:class:`fractions.Fraction` arithmetic whenever the point is rational.
Binary64 iteration of a slope-2 map loses one bit per step and collapses
onto 0 after ~53 iterations, so float mode is kept for ``GeneralInterval``
maps and for explicit ``--float`` runs only.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

from .errors import CapExceededError, ValidationError, VariantMismatchError

Real = Union[Fraction, float]

#: number of symbols used when a shift distance is evaluated in binary64
FLOAT_SHIFT_WINDOW = 64


def as_real(v) -> Real:
    """Coerce ints, rational strings ("p/q") and Fractions to Fraction; floats stay floats."""
    if isinstance(v, bool):
        raise ValidationError(f"not a real number: {v!r}")
    if isinstance(v, (Fraction, float)):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational string: {v!r}") from exc
    raise ValidationError(f"not a real number: {v!r}")


def as_threshold(v) -> Real:
    """Tolerance as an exact rational: floats go through their shortest repr.

    ``Fraction(1, 10) < 0.1`` is True because binary64 0.1 is slightly
    larger than 1/10; comparing exact costs against ``Fraction("0.1")``
    avoids accepting a cost equal to the threshold.
    """
    if isinstance(v, float):
        if math.isinf(v):
            return v
        return Fraction(repr(v))
    return Fraction(as_real(v))


# --------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class IntervalPoint:
    value: Real

    def __post_init__(self):
        v = as_real(self.value)
        if not 0 <= v <= 1:
            raise ValidationError(f"interval point outside [0,1]: {v}")
        object.__setattr__(self, "value", v)

    @property
    def exact(self) -> bool:
        return isinstance(self.value, Fraction)

    def __repr__(self):
        return f"IntervalPoint({self.value})"


@dataclass(frozen=True)
class CirclePoint:
    angle: Real

    def __post_init__(self):
        a = as_real(self.angle)
        object.__setattr__(self, "angle", a % 1)

    @property
    def exact(self) -> bool:
        return isinstance(self.angle, Fraction)

    def __repr__(self):
        return f"CirclePoint({self.angle})"


def _symbols(word, alphabet: int) -> tuple[int, ...]:
    if isinstance(word, str):
        if alphabet > 10:
            raise ValidationError("string words need alphabet <= 10; pass a list of ints")
        syms = tuple(int(ch) for ch in word)
    else:
        syms = tuple(int(s) for s in word)
    for s in syms:
        if not 0 <= s < alphabet:
            raise ValidationError(f"symbol {s} outside alphabet of size {alphabet}")
    return syms


def _primitive_root(word: tuple[int, ...]) -> tuple[int, ...]:
    n = len(word)
    for d in range(1, n + 1):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


@dataclass(frozen=True)
class ShiftPoint:
    """Eventually periodic sequence ``pre · period^∞`` over ``{0, …, alphabet-1}``.

    The representation is canonicalised on construction (primitive period,
    shortest preperiod), so two ShiftPoints compare equal exactly when
    they denote the same infinite sequence.
    """

    pre: tuple[int, ...]
    period: tuple[int, ...]
    alphabet: int = 2

    def __post_init__(self):
        if self.alphabet < 2:
            raise ValidationError("alphabet size must be >= 2")
        pre = _symbols(self.pre, self.alphabet)
        period = _primitive_root(_symbols(self.period, self.alphabet))
        if not period:
            raise ValidationError("shift point needs a nonempty period word")
        while pre and pre[-1] == period[-1]:
            pre = pre[:-1]
            period = period[-1:] + period[:-1]
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "period", period)

    exact = True

    def symbol(self, i: int) -> int:
        if i < len(self.pre):
            return self.pre[i]
        return self.period[(i - len(self.pre)) % len(self.period)]

    def window(self, length: int) -> tuple[int, ...]:
        return tuple(self.symbol(i) for i in range(length))

    def word(self) -> str:
        return "".join(map(str, self.pre)) + "(" + "".join(map(str, self.period)) + ")"

    def __repr__(self):
        return f"ShiftPoint({self.word()})"


Point = Union[IntervalPoint, CirclePoint, ShiftPoint]


def point_exact(p: Point) -> bool:
    return p.exact


# --------------------------------------------------------------------------
# systems


class System:
    """Base class: a continuous self-map together with its diameter-1 metric."""

    space: str = ""
    point_type: type = object

    def check_point(self, p) -> None:
        if not isinstance(p, self.point_type):
            raise VariantMismatchError(
                f"{type(p).__name__} is not a point of a {self.space} system")

    def apply(self, p):
        raise NotImplementedError

    def dist(self, a, b) -> Real:
        raise NotImplementedError


class IntervalSystem(System):
    space = "interval"
    point_type = IntervalPoint

    def dist(self, a: IntervalPoint, b: IntervalPoint) -> Real:
        self.check_point(a)
        self.check_point(b)
        return abs(a.value - b.value)


class PiecewiseLinear(IntervalSystem):
    """Continuous piecewise-affine map of [0,1] with rational data.

    ``breakpoints`` is ``0 = b_0 < b_1 < … < b_k = 1``; piece ``i`` acts on
    ``[b_i, b_{i+1}]`` as ``x ↦ slopes[i]·x + intercepts[i]``.
    """

    def __init__(self, breakpoints, slopes, intercepts, name: str | None = None):
        self.breakpoints = tuple(Fraction(as_real(b)) for b in breakpoints)
        self.slopes = tuple(Fraction(as_real(s)) for s in slopes)
        self.intercepts = tuple(Fraction(as_real(c)) for c in intercepts)
        self.name = name
        bp = self.breakpoints
        k = len(self.slopes)
        if len(bp) != k + 1 or len(self.intercepts) != k or k == 0:
            raise ValidationError("need k+1 breakpoints and k slope/intercept pairs")
        if bp[0] != 0 or bp[-1] != 1 or any(x >= y for x, y in zip(bp, bp[1:])):
            raise ValidationError("breakpoints must increase strictly from 0 to 1")
        for i in range(k):
            for x in (bp[i], bp[i + 1]):
                if not 0 <= self.slopes[i] * x + self.intercepts[i] <= 1:
                    raise ValidationError(f"piece {i} leaves [0,1] at x={x}")
        for i in range(1, k):
            left = self.slopes[i - 1] * bp[i] + self.intercepts[i - 1]
            right = self.slopes[i] * bp[i] + self.intercepts[i]
            if left != right:
                raise ValidationError(f"map is discontinuous at {bp[i]} ({left} vs {right})")
        self._fslopes = [float(s) for s in self.slopes]
        self._fintercepts = [float(c) for c in self.intercepts]

    def __repr__(self):
        if self.name:
            return f"PiecewiseLinear<{self.name}>"
        return f"PiecewiseLinear({len(self.slopes)} pieces)"

    @property
    def n_pieces(self) -> int:
        return len(self.slopes)

    def piece_index(self, v: Real) -> int:
        i = bisect_right(self.breakpoints, v) - 1
        return min(max(i, 0), self.n_pieces - 1)

    def value(self, v: Real) -> Real:
        i = self.piece_index(v)
        if isinstance(v, Fraction):
            return self.slopes[i] * v + self.intercepts[i]
        out = self._fslopes[i] * v + self._fintercepts[i]
        return min(max(out, 0.0), 1.0)

    def apply(self, p: IntervalPoint) -> IntervalPoint:
        self.check_point(p)
        return IntervalPoint(self.value(p.value))

    @property
    def lipschitz(self) -> Fraction:
        return max(abs(s) for s in self.slopes)

    def pieces(self):
        """Yield ``(lo, hi, slope, intercept)`` for every affine piece."""
        bp = self.breakpoints
        for i in range(self.n_pieces):
            yield bp[i], bp[i + 1], self.slopes[i], self.intercepts[i]

    def image_pieces(self, lo: Fraction, hi: Fraction) -> list[tuple[Fraction, Fraction]]:
        """Exact images of the monotone pieces of ``[lo, hi]`` (one closed interval each)."""
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi:
            raise ValidationError(f"empty interval [{lo}, {hi}]")
        cuts = [lo] + [b for b in self.breakpoints if lo < b < hi] + [hi]
        out = []
        for a, b in zip(cuts, cuts[1:] or cuts):
            fa, fb = self.value(a), self.value(b)
            out.append((min(fa, fb), max(fa, fb)))
        return out

    def image(self, lo, hi) -> tuple[Fraction, Fraction]:
        """Exact image ``f([lo, hi])``; a closed interval since f is continuous."""
        parts = self.image_pieces(lo, hi)
        return min(p[0] for p in parts), max(p[1] for p in parts)


class GeneralInterval(IntervalSystem):
    """Interval map given as a float callable; evaluated in binary64."""

    def __init__(self, func: Callable[[float], float], name: str = "general", params=None):
        self.func = func
        self.name = name
        self.params = dict(params or {})

    def __repr__(self):
        return f"GeneralInterval<{self.name}>"

    def value(self, v: Real) -> float:
        out = float(self.func(float(v)))
        if not -1e-12 <= out <= 1 + 1e-12:
            raise ValidationError(f"{self.name} maps {v} outside [0,1]")
        return min(max(out, 0.0), 1.0)

    def apply(self, p: IntervalPoint) -> IntervalPoint:
        self.check_point(p)
        return IntervalPoint(self.value(p.value))


class CircleRotation(System):
    """Rotation ``θ ↦ θ + α mod 1``; metric is twice the shortest arc."""

    space = "circle"
    point_type = CirclePoint

    def __init__(self, alpha):
        self.alpha = as_real(alpha)

    def __repr__(self):
        return f"CircleRotation({self.alpha})"

    def apply(self, p: CirclePoint) -> CirclePoint:
        self.check_point(p)
        return CirclePoint((p.angle + self.alpha) % 1)

    def dist(self, a: CirclePoint, b: CirclePoint) -> Real:
        self.check_point(a)
        self.check_point(b)
        t = abs(a.angle - b.angle) % 1
        return 2 * min(t, 1 - t)


class FullShift(System):
    """One-sided full shift; ``d(a,b) = Σ_i 2^{-(i+1)} [a_i ≠ b_i]``."""

    space = "shift"
    point_type = ShiftPoint

    def __init__(self, alphabet: int = 2):
        if alphabet < 2:
            raise ValidationError("alphabet size must be >= 2")
        self.alphabet = alphabet

    def __repr__(self):
        return f"FullShift({self.alphabet})"

    def check_point(self, p) -> None:
        super().check_point(p)
        if p.alphabet != self.alphabet:
            raise VariantMismatchError(
                f"point over {p.alphabet} symbols used with FullShift({self.alphabet})")

    def apply(self, p: ShiftPoint) -> ShiftPoint:
        self.check_point(p)
        if p.pre:
            return ShiftPoint(p.pre[1:], p.period, p.alphabet)
        return ShiftPoint((), p.period[1:] + p.period[:1], p.alphabet)

    def dist(self, a: ShiftPoint, b: ShiftPoint) -> Fraction:
        self.check_point(a)
        self.check_point(b)
        return shift_distance(a, b)


def shift_distance(a: ShiftPoint, b: ShiftPoint) -> Fraction:
    """Exact value of the shift metric via the geometric tail of the common period."""
    head_len = max(len(a.pre), len(b.pre))
    per = math.lcm(len(a.period), len(b.period))
    head = 0
    for i in range(head_len):
        head = 2 * head + (a.symbol(i) != b.symbol(i))
    cyc = 0
    for i in range(head_len, head_len + per):
        cyc = 2 * cyc + (a.symbol(i) != b.symbol(i))
    # head/2^L + cyc / ((2^P - 1) 2^L)
    return Fraction(head * ((1 << per) - 1) + cyc, ((1 << per) - 1) << head_len)


def shift_distance_float(a: ShiftPoint, b: ShiftPoint) -> float:
    wa, wb = a.window(FLOAT_SHIFT_WINDOW), b.window(FLOAT_SHIFT_WINDOW)
    return float(sum(0.5 ** (i + 1) for i in range(FLOAT_SHIFT_WINDOW) if wa[i] != wb[i]))


# --------------------------------------------------------------------------
# built-in systems


def tent() -> PiecewiseLinear:
    return PiecewiseLinear([0, Fraction(1, 2), 1], [2, -2], [0, 2], name="tent")


def swap_map() -> PiecewiseLinear:
    """Transitive, not weakly mixing: swaps D_0=[0,1/2] and D_1=[1/2,1].

    ``g(x) = 1 - x`` on [0,1/2] and ``g(x) = |4x - 3|/2`` on [1/2,1]; g² on
    D_0 is a rescaled tent map (slopes ±2).
    """
    h = Fraction(1, 2)
    return PiecewiseLinear([0, h, Fraction(3, 4), 1], [-1, -2, 2], [1, h * 3, -h * 3],
                           name="swap")


def renormalization_model(depth: int = 1) -> PiecewiseLinear:
    """Piecewise-linear map with a cycle of ``2**depth`` disjoint intervals.

    Built by the doubling recursion ``f(x) = x + 2/3`` on [0,1/3],
    ``f(x) = g(3x - 2)/3`` on [2/3,1] with ``g`` the model of depth-1, so
    that f² on [0,1/3] is a rescaled copy of g; the bottom level is the tent map.
    """
    if depth < 0:
        raise ValidationError("depth must be >= 0")
    if depth == 0:
        return tent()
    g = renormalization_model(depth - 1)
    third = Fraction(1, 3)
    bps = [Fraction(0), third, 2 * third]
    slopes = [Fraction(1), None]
    inters = [2 * third, None]
    for lo, hi, s, c in g.pieces():
        # x in [2/3,1] -> u = 3x - 2 in [0,1]; f = (s u + c)/3 = s x + (c - 2 s)/3
        bps.append(2 * third + hi * third)
        slopes.append(s)
        inters.append((c - 2 * s) / 3)
    f_right = g.value(Fraction(0)) / 3
    slopes[1] = (f_right - 1) / third
    inters[1] = 1 - slopes[1] * third
    return PiecewiseLinear(bps, slopes, inters, name=f"renorm{depth}")


def logistic(r=4.0) -> GeneralInterval:
    r = float(r)
    if not 0 <= r <= 4:
        raise ValidationError("logistic parameter must lie in [0,4]")
    return GeneralInterval(lambda x: r * x * (1.0 - x), name="logistic", params={"r": r})


def compose(f: PiecewiseLinear, g: PiecewiseLinear) -> PiecewiseLinear:
    """Exact piecewise-linear composition ``f ∘ g`` (pieces are not merged)."""
    bps = [Fraction(0)]
    slopes, inters = [], []
    for lo, hi, s, c in g.pieces():
        cuts = {lo, hi}
        if s != 0:
            for b in f.breakpoints:
                x = (b - c) / s
                if lo < x < hi:
                    cuts.add(x)
        cuts = sorted(cuts)
        for a, b in zip(cuts, cuts[1:]):
            mid = g.value((a + b) / 2)
            j = f.piece_index(mid)
            slopes.append(f.slopes[j] * s)
            inters.append(f.slopes[j] * c + f.intercepts[j])
            bps.append(b)
    return PiecewiseLinear(bps, slopes, inters)


def iterate_map(f: PiecewiseLinear, k: int, max_pieces: int = 1 << 16) -> PiecewiseLinear:
    """Exact ``f^k``; every piece of the result is one monotone branch."""
    if k < 1:
        raise ValidationError("iterate count must be >= 1")
    out = f
    for _ in range(k - 1):
        out = compose(f, out)
        if out.n_pieces > max_pieces:
            raise CapExceededError(f"f^{k} has more than {max_pieces} branches")
    return out


# --------------------------------------------------------------------------
# operations


def apply(system: System, p: Point) -> Point:
    return system.apply(p)


def dist(system: System, a: Point, b: Point) -> Real:
    return system.dist(a, b)


def orbit(system: System, x: Point, n: int) -> list:
    """``[x, Tx, …, T^{n-1}x]``."""
    if n < 1:
        raise ValidationError("orbit length must be >= 1")
    system.check_point(x)
    out = [x]
    for _ in range(n - 1):
        out.append(system.apply(out[-1]))
    return out


def iterate(system: System, x: Point, k: int) -> Point:
    for _ in range(k):
        x = system.apply(x)
    return x


def least_period(system: System, x: Point, max_period: int) -> int | None:
    """Smallest ``p <= max_period`` with ``T^p x = x`` (exact equality), else None."""
    y = x
    for p in range(1, max_period + 1):
        y = system.apply(y)
        if y == x:
            return p
    return None


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported probability measure with rational weights."""

    support: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.support) != len(self.weights) or not self.support:
            raise ValidationError("support and weights must be nonempty and of equal length")
        merged: dict = {}
        for p, w in zip(self.support, self.weights):
            w = Fraction(as_real(w)) if not isinstance(w, Fraction) else w
            if w < 0:
                raise ValidationError(f"negative weight {w}")
            merged[p] = merged.get(p, Fraction(0)) + w
        if sum(merged.values()) != 1:
            raise ValidationError(f"weights sum to {sum(merged.values())}, not 1")
        object.__setattr__(self, "support", tuple(merged))
        object.__setattr__(self, "weights", tuple(merged.values()))

    @classmethod
    def dirac(cls, p) -> DiscreteMeasure:
        return cls((p,), (Fraction(1),))

    @classmethod
    def uniform(cls, points: Sequence) -> DiscreteMeasure:
        n = len(points)
        return cls(tuple(points), (Fraction(1, n),) * n)

    def __len__(self):
        return len(self.support)

    def items(self):
        return zip(self.support, self.weights)

    def mass(self, p) -> Fraction:
        for q, w in self.items():
            if q == p:
                return w
        return Fraction(0)


@dataclass(frozen=True)
class EmpiricalMeasure:
    """``(1/n) Σ δ_{atoms[i]}``; atom order records the orbit segment."""

    atoms: tuple
    n: int = field(init=False)

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if not atoms:
            raise ValidationError("empirical measure needs at least one atom")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "n", len(atoms))

    def to_discrete(self) -> DiscreteMeasure:
        return DiscreteMeasure.uniform(self.atoms)


def empirical(system: System, x: Point, n: int) -> EmpiricalMeasure:
    return EmpiricalMeasure(tuple(orbit(system, x, n)))


def convex_combination(parts: Iterable[tuple]) -> DiscreteMeasure:
    """Merge ``(weight, measure)`` pairs into one measure with exact rational weights."""
    parts = list(parts)
    if not parts:
        raise ValidationError("empty convex combination")
    total = Fraction(0)
    support, weights = [], []
    for lam, mu in parts:
        lam = Fraction(as_real(lam))
        if lam < 0:
            raise ValidationError(f"negative convex weight {lam}")
        total += lam
        for p, w in mu.items():
            support.append(p)
            weights.append(lam * w)
    if total != 1:
        raise ValidationError(f"convex weights sum to {total}, not 1")
    return DiscreteMeasure(tuple(support), tuple(weights))


@dataclass(frozen=True)
class QuasiRegularReport:
    regular: bool
    horizons: tuple
    gaps: tuple  # gamma between consecutive horizons
    tol: float

    @property
    def max_gap(self):
        return max(self.gaps)


def is_quasi_regular(system: System, x: Point, horizons: Sequence[int], tol: float,
                     exact: bool | None = None) -> QuasiRegularReport:
    """Finite-horizon Cauchy test for the empirical measures ``m_T(x, n)``."""
    from .transport import gamma

    horizons = [int(h) for h in horizons]
    if len(horizons) < 2 or any(a >= b for a, b in zip(horizons, horizons[1:])) or horizons[0] < 1:
        raise ValidationError("need >= 2 strictly increasing positive horizons")
    pts = orbit(system, x, horizons[-1])
    measures = [DiscreteMeasure.uniform(pts[:h]) for h in horizons]
    gaps = tuple(gamma(a, b, system, exact=exact) for a, b in zip(measures, measures[1:]))
    return QuasiRegularReport(max(gaps) < tol, tuple(horizons), gaps, tol)


# --------------------------------------------------------------------------
# point generators and mode conversion


def random_shift_point(rng: np.random.Generator, length: int, tail="0", alphabet: int = 2) -> ShiftPoint:
    """Seeded pseudorandom word of ``length`` symbols followed by ``tail^∞``."""
    word = tuple(int(s) for s in rng.integers(0, alphabet, size=length))
    return ShiftPoint(word, _symbols(tail, alphabet), alphabet)


def truncation(x: ShiftPoint, q: int) -> ShiftPoint:
    """Periodic point ``(x_0 … x_{q-1})^∞``."""
    return ShiftPoint((), x.window(q), x.alphabet)


def tent_generic_orbit(n: int, rng: np.random.Generator, burn_in: int = 64) -> list[IntervalPoint]:
    """Float orbit segment of the tent map typical for Lebesgue measure.

    Iterates the logistic map ``4z(1-z)`` (which does not collapse in
    binary64) and pulls each point back through the conjugacy
    ``t = (2/π) arcsin(√z)``.
    """
    z = float(rng.uniform(0.05, 0.95))
    for _ in range(burn_in):
        z = 4.0 * z * (1.0 - z)
    out = []
    for _ in range(n):
        t = 2.0 / math.pi * math.asin(math.sqrt(min(max(z, 0.0), 1.0)))
        out.append(IntervalPoint(min(max(t, 0.0), 1.0)))
        z = 4.0 * z * (1.0 - z)
    return out


def to_float(p: Point) -> Point:
    if isinstance(p, IntervalPoint):
        return IntervalPoint(float(p.value))
    if isinstance(p, CirclePoint):
        return CirclePoint(float(p.angle))
    return p
