"""Periodic orbits and bounded searches for density / closability / linkability witnesses.

Every search runs over a *periodic-orbit source*: an object with a method
``orbits(period)`` returning the orbits of exact least period ``period``
it offers.  Searches visit candidates by increasing period, then
increasing horizon, return the first witness below the threshold, and
otherwise return a :class:`SearchFailure` carrying the best candidate seen.
"""
from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .dynsys import (
    DiscreteMeasure,
    IntervalPoint,
    PiecewiseLinear,
    Point,
    Real,
    ShiftPoint,
    as_threshold,
    System,
    iterate,
    iterate_map,
    orbit,
    truncation,
)
from .errors import CapExceededError, CoveringError, NotPeriodicError, ValidationError
from .pseudometric import sequence_cost

SHIFT_WORD_CAP = 1 << 20
PERIOD_CAP = 12
HORIZON_CAP = 4096
WITNESS_ASSIGNMENT_CAP = 1024


@dataclass(frozen=True)
class PeriodicOrbit:
    base: Point
    period: int
    orbit: tuple

    @property
    def measure(self) -> DiscreteMeasure:
        return DiscreteMeasure.uniform(self.orbit)

    def segment(self, n: int) -> list:
        """``[x, Tx, …, T^{n-1}x]`` read off the stored cycle."""
        reps = -(-n // self.period)
        return list(self.orbit * reps)[:n]


def periodic_orbit(system: System, x: Point, max_period: int = HORIZON_CAP) -> PeriodicOrbit:
    """Exact least period and cycle of x (rational / symbolic points only)."""
    pts = [x]
    y = system.apply(x)
    while y != x:
        if len(pts) >= max_period:
            raise NotPeriodicError(f"{x!r} has no period <= {max_period}")
        pts.append(y)
        y = system.apply(y)
    return PeriodicOrbit(x, len(pts), tuple(pts))


# --------------------------------------------------------------------------
# enumeration


def _divisors(p: int) -> list[int]:
    return [d for d in range(1, p + 1) if p % d == 0]


def shift_orbits_of_period(alphabet: int, d: int, cap: int = SHIFT_WORD_CAP) -> list[PeriodicOrbit]:
    """One orbit per necklace of primitive words of length exactly d."""
    if alphabet ** d > cap:
        raise CapExceededError(f"{alphabet}^{d} words exceed cap {cap}")
    out = []
    for word in itertools.product(range(alphabet), repeat=d):
        rots = [word[i:] + word[:i] for i in range(d)]
        if word != min(rots) or len(set(rots)) != d:
            continue
        pts = tuple(ShiftPoint((), r, alphabet) for r in rots)
        out.append(PeriodicOrbit(pts[0], d, pts))
    return out


def enumerate_shift_periodic(alphabet: int, p: int, cap: int = SHIFT_WORD_CAP) -> list[PeriodicOrbit]:
    """All full-shift orbits whose least period divides p."""
    if p < 1:
        raise ValidationError("period must be >= 1")
    if alphabet ** p > cap:
        raise CapExceededError(f"{alphabet}^{p} words exceed cap {cap}")
    return [o for d in _divisors(p) for o in shift_orbits_of_period(alphabet, d, cap)]


def fixed_points_of_iterate(system: PiecewiseLinear, p: int,
                            max_pieces: int = 1 << 16) -> list[Fraction]:
    """Sorted exact solutions of ``f^p(x) = x``, one affine solve per branch of f^p."""
    if not isinstance(system, PiecewiseLinear):
        raise ValidationError("exact periodic points need a piecewise-linear map")
    if system.n_pieces ** p > max_pieces and p > 1:
        raise CapExceededError(f"{system.n_pieces}^{p} branches exceed cap {max_pieces}")
    fp = iterate_map(system, p, max_pieces)
    sols = set()
    for lo, hi, s, c in fp.pieces():
        if s == 1:
            if c == 0:
                raise ValidationError(f"f^{p} is the identity on [{lo}, {hi}]")
            continue
        x = c / (1 - s)
        if lo <= x <= hi:
            sols.add(x)
    return sorted(sols)


def interval_periodic_points(system: PiecewiseLinear, p: int,
                             max_pieces: int = 1 << 16) -> list[PeriodicOrbit]:
    """Orbits of all solutions of ``f^p(x) = x``, ordered by (least period, smallest point)."""
    sols = fixed_points_of_iterate(system, p, max_pieces)
    seen = set()
    out = []
    for x in sols:
        if x in seen:
            continue
        orb = periodic_orbit(system, IntervalPoint(x), p)
        seen.update(q.value for q in orb.orbit)
        out.append(orb)
    out.sort(key=lambda o: (o.period, min(q.value for q in o.orbit)))
    return out


# --------------------------------------------------------------------------
# periodic-orbit sources


class ListSource:
    """Fixed finite collection of orbits."""

    def __init__(self, orbits: Sequence[PeriodicOrbit]):
        self._by_period: dict[int, list[PeriodicOrbit]] = {}
        for o in orbits:
            self._by_period.setdefault(o.period, []).append(o)

    def orbits(self, period: int) -> list[PeriodicOrbit]:
        return self._by_period.get(period, [])

    def describe(self) -> dict:
        return {"kind": "list", "count": sum(map(len, self._by_period.values()))}


class ShiftNecklaceSource:
    """Every periodic orbit of the full shift."""

    def __init__(self, alphabet: int = 2, cap: int = SHIFT_WORD_CAP):
        self.alphabet = alphabet
        self.cap = cap
        self._cache: dict[int, list] = {}

    def orbits(self, period: int) -> list[PeriodicOrbit]:
        if period not in self._cache:
            self._cache[period] = shift_orbits_of_period(self.alphabet, period, self.cap)
        return self._cache[period]

    def describe(self) -> dict:
        return {"kind": "shift_necklaces", "alphabet": self.alphabet}


class IntervalBranchSource:
    """Every periodic orbit of a rational piecewise-linear interval map."""

    def __init__(self, system: PiecewiseLinear, max_pieces: int = 1 << 16):
        self.system = system
        self.max_pieces = max_pieces
        self._cache: dict[int, list] = {}

    def orbits(self, period: int) -> list[PeriodicOrbit]:
        if period not in self._cache:
            allp = interval_periodic_points(self.system, period, self.max_pieces)
            self._cache[period] = [o for o in allp if o.period == period]
        return self._cache[period]

    def describe(self) -> dict:
        return {"kind": "interval_branches"}


class TruncationSource:
    """Periodic closings ``(y_0 … y_{q-1})^∞`` of a shift point y."""

    def __init__(self, y: ShiftPoint):
        self.y = y

    def orbits(self, period: int) -> list[PeriodicOrbit]:
        z = truncation(self.y, period)
        if len(z.period) != period:
            return []  # same point as the truncation at its least period
        rots = [ShiftPoint((), z.period[i:] + z.period[:i], z.alphabet) for i in range(period)]
        return [PeriodicOrbit(z, period, tuple(rots))]

    def describe(self) -> dict:
        return {"kind": "truncation"}


def as_source(K):
    if hasattr(K, "orbits"):
        return K
    return ListSource(list(K))


# --------------------------------------------------------------------------
# covering chains


@dataclass(frozen=True)
class CoveringChain:
    intervals: tuple  # ((lo, hi), ...) cyclic

    def __post_init__(self):
        ivs = tuple((Fraction(lo), Fraction(hi)) for lo, hi in self.intervals)
        if not ivs:
            raise ValidationError("empty covering chain")
        for lo, hi in ivs:
            if not 0 <= lo <= hi <= 1:
                raise ValidationError(f"bad chain interval [{lo}, {hi}]")
        object.__setattr__(self, "intervals", ivs)

    def __len__(self):
        return len(self.intervals)

    def violations(self, system: PiecewiseLinear) -> list[int]:
        """Indices i with ``f(I_i) ⊉ I_{i+1}`` (exact)."""
        bad = []
        m = len(self.intervals)
        for i, (lo, hi) in enumerate(self.intervals):
            a, b = system.image(lo, hi)
            nlo, nhi = self.intervals[(i + 1) % m]
            if not (a <= nlo and nhi <= b):
                bad.append(i)
        return bad


def _restrict_branches(system: PiecewiseLinear, branches, target):
    """Compose each branch with f and keep the part mapped into ``target``."""
    tlo, thi = target
    out = []
    for lo, hi, s, c in branches:
        cuts = {lo, hi}
        if s != 0:
            for b in system.breakpoints:
                x = (b - c) / s
                if lo < x < hi:
                    cuts.add(x)
        cuts = sorted(cuts)
        pairs = list(zip(cuts, cuts[1:])) or [(lo, hi)]
        for a, b in pairs:
            j = system.piece_index(s * (a + b) / 2 + c)
            s2 = system.slopes[j] * s
            c2 = system.slopes[j] * c + system.intercepts[j]
            if s2 == 0:
                if tlo <= c2 <= thi:
                    out.append((a, b, s2, c2))
                continue
            x1, x2 = sorted(((tlo - c2) / s2, (thi - c2) / s2))
            na, nb = max(a, x1), min(b, x2)
            if na <= nb:
                out.append((na, nb, s2, c2))
    return out


def loop_periodic_point(system: PiecewiseLinear, chain: CoveringChain) -> PeriodicOrbit:
    """Periodic point following the chain (``f^i(x) ∈ I_i``, ``f^m(x) = x``).

    Found exactly by refining nested preimages along the chain, then
    solving the affine fixed-point equation on each surviving branch.
    """
    if not isinstance(system, PiecewiseLinear):
        raise ValidationError("loop_periodic_point needs a piecewise-linear map")
    bad = chain.violations(system)
    if bad:
        raise CoveringError(f"covering fails at chain positions {bad}")
    m = len(chain)
    lo0, hi0 = chain.intervals[0]
    branches = [(lo0, hi0, Fraction(1), Fraction(0))]
    for i in range(1, m + 1):
        branches = _restrict_branches(system, branches, chain.intervals[i % m])
    sols = []
    for lo, hi, s, c in branches:
        if s == 1:
            if c == 0:
                sols.append(lo)
            continue
        x = c / (1 - s)
        if lo <= x <= hi:
            sols.append(x)
    if not sols:
        raise CoveringError("no periodic point found along the chain")
    x = min(sols)
    orb = periodic_orbit(system, IntervalPoint(x), m)
    if m % orb.period:
        raise NotPeriodicError("solution does not return after the chain length")
    return orb


@dataclass(frozen=True)
class OmegaChainReport:
    chain: CoveringChain
    level: int
    verified: bool
    violations: tuple
    padding: float
    diameters: tuple  # sorted decreasingly
    sampled_images: bool


def omega_limit_intervals(system, y: IntervalPoint, level: int, burn_in: int = 1000,
                          samples: int = 256, pad: float = 1e-9) -> OmegaChainReport:
    """Approximate ``I^i = [min, max] ω_{f^{2^n}}(f^i y)`` from late orbit samples.

    Exact rational orbits give exact hulls and no padding; binary64 orbits
    are padded outward by ``pad``.  The covering check runs afterwards and a
    failure is reported in the result, never repaired.
    """
    if samples < 1 or level < 0:
        raise ValidationError("need samples >= 1 and level >= 0")
    k = 2 ** level
    z = iterate(system, y, burn_in * k)
    pts = orbit(system, z, samples * k)
    hulls = []
    for i in range(k):
        vals = [p.value for p in pts[i::k]]
        hulls.append((min(vals), max(vals)))
    exact = all(isinstance(v, Fraction) for h in hulls for v in h)
    padding = 0.0 if exact else pad
    if not exact:
        hulls = [(max(0.0, float(lo) - pad), min(1.0, float(hi) + pad)) for lo, hi in hulls]
    chain = CoveringChain(tuple((Fraction(lo), Fraction(hi)) for lo, hi in hulls))
    if isinstance(system, PiecewiseLinear):
        bad = tuple(chain.violations(system))
        sampled = False
    else:
        bad = tuple(_sampled_violations(system, chain))
        sampled = True
    diam = tuple(sorted((float(hi - lo) for lo, hi in chain.intervals), reverse=True))
    return OmegaChainReport(chain, level, not bad, bad, padding, diam, sampled)


def _sampled_violations(system, chain: CoveringChain, grid: int = 1024) -> list[int]:
    bad = []
    m = len(chain)
    for i, (lo, hi) in enumerate(chain.intervals):
        xs = [float(lo) + (float(hi) - float(lo)) * t / grid for t in range(grid + 1)]
        vals = [system.value(x) for x in xs]
        nlo, nhi = chain.intervals[(i + 1) % m]
        if not (min(vals) <= float(nlo) and float(nhi) <= max(vals)):
            bad.append(i)
    return bad


# --------------------------------------------------------------------------
# density searches


@dataclass(frozen=True)
class DensityWitness:
    orbit: PeriodicOrbit
    n: int
    cost: Real
    eps: Real
    target: str
    explored: int
    found: bool = field(default=True, init=False)


@dataclass(frozen=True)
class SearchFailure:
    best_cost: Real | None
    best: dict | None
    eps: Real
    target: str
    explored: int
    caps: dict
    found: bool = field(default=False, init=False)


class _Segment:
    """Lazily extended orbit segment of a point, or a fixed finite sequence."""

    def __init__(self, system: System, y):
        self.system = system
        if isinstance(y, (list, tuple)):
            self.pts = list(y)
            self.fixed = True
        else:
            self.pts = [y]
            self.fixed = False

    def __len__(self):
        return len(self.pts) if self.fixed else 1 << 62

    def take(self, n: int) -> list:
        while len(self.pts) < n:
            if self.fixed:
                raise ValidationError(f"target sequence shorter than horizon {n}")
            self.pts.append(self.system.apply(self.pts[-1]))
        return self.pts[:n]


def _describe(y, limit: int = 80) -> str:
    if isinstance(y, (list, tuple)):
        return f"sequence[{len(y)}]"
    s = repr(y)
    if len(s) > limit:
        s = f"{s[:limit - 20]}...<{len(s)} chars>"
    return s


def check_density_convex(system: System, K, ys: Sequence, eps, N: int = 1,
                         period_cap: int = PERIOD_CAP, horizon_cap: int = HORIZON_CAP,
                         assignment_cap: int = WITNESS_ASSIGNMENT_CAP, max_multiples: int = 4,
                         exact: bool | None = None, method: str = "auto"):
    """Search x in K, n >= N with ``T^{kn} x = x`` approximating the stitched targets.

    The stitched sequence is ``z_{i+(j-1)n} = T^i y_j``; the certified value
    is the min-permutation cost between z and the first kn orbit points of x.
    Each y_j is a point or an explicit finite orbit segment.
    """
    if not ys:
        raise ValidationError("need at least one target")
    if N < 1:
        raise ValidationError("N must be >= 1")
    eps = as_threshold(eps)
    source = as_source(K)
    k = len(ys)
    segs = [_Segment(system, y) for y in ys]
    target = " + ".join(_describe(y) for y in ys)
    limit = min(horizon_cap, min(len(s) for s in segs))
    if k * N > assignment_cap:
        raise CapExceededError(f"k*N = {k * N} exceeds assignment cap {assignment_cap}")
    best_cost, best, explored = None, None, 0
    for p in range(1, period_cap + 1):
        step = p // math.gcd(p, k)
        n0 = step * -(-N // step)
        for orb in source.orbits(p):
            for t in range(max_multiples):
                n = n0 + t * step
                if n > limit or k * n > assignment_cap:
                    break
                z = [pt for s in segs for pt in s.take(n)]
                cost = sequence_cost(system, z, orb.segment(k * n), exact, method,
                                     max_n=assignment_cap)
                explored += 1
                if best_cost is None or cost < best_cost:
                    best_cost = cost
                    best = {"orbit": orb, "n": n}
                if cost < eps:
                    return DensityWitness(orb, n, cost, eps, target, explored)
    caps = {"period_cap": period_cap, "horizon_cap": horizon_cap,
            "assignment_cap": assignment_cap, "max_multiples": max_multiples}
    return SearchFailure(best_cost, best, eps, target, explored, caps)


def check_density_ergodic(system: System, K, y, eps, N: int = 1, **caps):
    """Search x in K, n >= N with ``T^n x = x`` and small min-permutation cost to y's orbit."""
    return check_density_convex(system, K, [y], eps, N, **caps)


# --------------------------------------------------------------------------
# closability


@dataclass(frozen=True)
class ClosableWitness:
    p: int
    q: int
    y: Point
    sup_distance: Real
    eps: Real
    found: bool = field(default=True, init=False)


def check_closable(system: System, K, x, eps, N: int = 1, period_cap: int = PERIOD_CAP,
                   horizon_cap: int = HORIZON_CAP, max_multiples: int = 8):
    """Find ``N <= p <= q <= (1+eps) p`` and y in K with ``T^q y = y`` and
    ``d(T^i y, T^i x) < eps`` for ``i < p``."""
    eps = as_threshold(eps)
    source = as_source(K)
    seg = _Segment(system, x)
    best_sup, best, explored = None, None, 0
    one_eps = 1 + eps
    for d in range(1, period_cap + 1):
        q0 = d * -(-N // d)
        for orb in source.orbits(d):
            for start in range(d):
                cyc = orb.orbit[start:] + orb.orbit[:start]
                for t in range(max_multiples):
                    q = q0 + t * d
                    if q > horizon_cap or q > len(seg):
                        break
                    p_lo = max(N, math.ceil(q / one_eps))
                    while p_lo > 1 and q <= one_eps * (p_lo - 1) and p_lo - 1 >= N:
                        p_lo -= 1
                    if p_lo > q:
                        continue
                    xs = seg.take(q)
                    dists = [system.dist(cyc[i % d], xs[i]) for i in range(q)]
                    explored += 1
                    reach = next((i for i, v in enumerate(dists) if v >= eps), q)
                    if reach >= p_lo:
                        p = min(reach, q)
                        return ClosableWitness(p, q, cyc[0], max(dists[:p]), eps)
                    sup = max(dists[:p_lo])
                    if best_sup is None or sup < best_sup:
                        best_sup, best = sup, {"y": cyc[0], "q": q, "p": p_lo}
    caps = {"period_cap": period_cap, "horizon_cap": horizon_cap, "max_multiples": max_multiples}
    return SearchFailure(best_sup, best, eps, _describe(x), explored, caps)


def closable_mean_bound(system: System, x: Point, y: Point, q: int) -> Real:
    """``(1/q) Σ_{i<q} d(T^i x, T^i y)`` for a q-periodic y."""
    if iterate(system, y, q) != y:
        raise NotPeriodicError(f"T^{q} y != y")
    xs, ys = orbit(system, x, q), orbit(system, y, q)
    return sum(system.dist(a, b) for a, b in zip(xs, ys)) / q


# --------------------------------------------------------------------------
# linkability


@dataclass(frozen=True)
class LinkWitness:
    p1: int
    p2: int
    q1: int
    q2: int
    z: PeriodicOrbit
    cost: Real
    eps: Real
    lam: Real
    found: bool = field(default=True, init=False)


def stitched(y1: PeriodicOrbit, y2: PeriodicOrbit, q1: int, q2: int) -> list:
    """``x_i = T^i y1`` for ``i < q1`` then ``T^{i-q1} y2`` up to ``q2``."""
    return y1.segment(q1) + y2.segment(q2 - q1)


def _link_splits(r1: int, r2: int, q2: int, lam, eps):
    """Feasible ``(p1, p2, q1)`` for a given q2, ascending in q1."""
    one_eps = 1 + eps
    seen = set()
    for p1 in range(r1, q2, r1):
        for p2 in range(r2, q2 - p1 + 1, r2):
            ratio = Fraction(p1, p1 + p2)
            if not lam - eps <= ratio <= lam + eps:
                continue
            for q1 in range(p1, q2 - p2 + 1):
                if q1 > one_eps * p1:
                    break
                if p2 <= q2 - q1 <= one_eps * p2 and q1 not in seen:
                    seen.add(q1)
                    yield p1, p2, q1


def check_linkable_pair(system: System, y1: PeriodicOrbit, y2: PeriodicOrbit, lam, eps, K,
                        period_cap: int = PERIOD_CAP,
                        assignment_cap: int = WITNESS_ASSIGNMENT_CAP,
                        exact: bool | None = None, method: str = "auto"):
    """Search for a z in K whose orbit measure matches the λ-proportioned concatenation.

    ``q2`` ranges up to ``period_cap`` and z over source orbits whose period
    divides q2.
    """
    eps, lam = as_threshold(eps), as_threshold(lam)
    if not 0 <= lam <= 1:
        raise ValidationError("lambda must lie in [0, 1]")
    source = as_source(K)
    best_cost, best, explored = None, None, 0
    for q2 in range(2, period_cap + 1):
        if q2 > assignment_cap:
            raise CapExceededError(f"q2 = {q2} exceeds assignment cap {assignment_cap}")
        zs = [o for d in _divisors(q2) for o in source.orbits(d)]
        for p1, p2, q1 in _link_splits(y1.period, y2.period, q2, lam, eps):
            xs = stitched(y1, y2, q1, q2)
            for z in zs:
                cost = sequence_cost(system, xs, z.segment(q2), exact, method)
                explored += 1
                if best_cost is None or cost < best_cost:
                    best_cost = cost
                    best = {"p1": p1, "p2": p2, "q1": q1, "q2": q2, "z": z}
                if cost < eps:
                    return LinkWitness(p1, p2, q1, q2, z, cost, eps, lam)
    caps = {"period_cap": period_cap, "assignment_cap": assignment_cap}
    return SearchFailure(best_cost, best, eps, f"{y1.base!r} | {y2.base!r}", explored, caps)
