"""Exact Wasserstein-1 distances between finite measures.

Three routes to the same number:

* :func:`assignment_cost` for equal-size uniform measures (the min over
  permutations of the average matched distance),
* :func:`w1_discrete`, a min-cost flow on rational weights scaled to a
  common denominator,
* closed forms on one-dimensional spaces (:func:`w1_sorted_interval`,
  :func:`w1_interval`, :func:`w1_circle`).

Exact mode stores a cost matrix as an integer array over one common
denominator, so every solver works on integers.  Integer-valued binary64
arithmetic is exact below 2**53, which lets the compiled
``scipy.optimize.linear_sum_assignment`` solve exact instances as long as
the scaled entries stay small; otherwise the pure numpy Hungarian solver
below runs on Python integers.
"""
from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment

from .dynsys import (
    FLOAT_SHIFT_WINDOW,
    DiscreteMeasure,
    EmpiricalMeasure,
    IntervalPoint,
    Real,
    System,
    shift_distance,
)
from .errors import CapExceededError, ValidationError

ASSIGNMENT_CAP = 4096
WEIGHT_LCM_CAP = 1 << 31
FLOAT_ATOL = 1e-9
_EXACT_FLOAT_LIMIT = 1 << 52
_INT64_LIMIT = 1 << 60


@dataclass(frozen=True)
class CostMatrix:
    """Pairwise distances; ``values / denom`` when exact, plain floats otherwise."""

    values: np.ndarray
    denom: int | None = None

    @property
    def exact(self) -> bool:
        return self.denom is not None

    @property
    def shape(self):
        return self.values.shape

    def entry(self, i: int, j: int) -> Real:
        if self.exact:
            return Fraction(int(self.values[i, j]), self.denom)
        return float(self.values[i, j])

    def to_float(self) -> np.ndarray:
        if self.exact:
            return np.array([[float(Fraction(int(v), self.denom)) for v in row]
                             for row in self.values], dtype=float).reshape(self.shape)
        return np.asarray(self.values, dtype=float)

    @classmethod
    def from_entries(cls, rows, exact: bool | None = None) -> CostMatrix:
        """Build from a nested list of Fractions/ints (exact) or floats."""
        rows = [list(r) for r in rows]
        flat = [v for r in rows for v in r]
        if exact is None:
            exact = all(isinstance(v, (int, Fraction)) for v in flat)
        if not exact:
            return cls(np.array(rows, dtype=float))
        fr = [Fraction(v) for v in flat]
        den = math.lcm(*(f.denominator for f in fr)) if fr else 1
        ints = [f.numerator * (den // f.denominator) for f in fr]
        return cls(_int_array(ints, (len(rows), len(rows[0]) if rows else 0)), den)


def _int_array(ints, shape) -> np.ndarray:
    if ints and max(abs(v) for v in ints) >= _INT64_LIMIT:
        arr = np.empty(len(ints), dtype=object)
        arr[:] = ints
        return arr.reshape(shape)
    return np.array(ints, dtype=np.int64).reshape(shape)


def _resolve_exact(points, exact: bool | None) -> bool:
    all_exact = all(p.exact for p in points)
    if exact is None:
        return all_exact
    if exact and not all_exact:
        raise ValidationError("exact mode requested but some points are binary64")
    return exact


def _common_scale(values: Sequence[Fraction]) -> tuple[list[int], int]:
    den = math.lcm(*(v.denominator for v in values)) if values else 1
    return [v.numerator * (den // v.denominator) for v in values], den


def cost_matrix(system: System, a: Sequence, b: Sequence, exact: bool | None = None) -> CostMatrix:
    """``C[i, j] = d(a_i, b_j)``."""
    for p in list(a) + list(b):
        system.check_point(p)
    exact = _resolve_exact(list(a) + list(b), exact)
    n, m = len(a), len(b)
    if system.space == "interval":
        if exact:
            ints, den = _common_scale([p.value for p in a] + [p.value for p in b])
            va, vb = _int_array(ints[:n], (n,)), _int_array(ints[n:], (m,))
            return CostMatrix(np.abs(va[:, None] - vb[None, :]), den)
        va = np.array([float(p.value) for p in a])
        vb = np.array([float(p.value) for p in b])
        return CostMatrix(np.abs(va[:, None] - vb[None, :]))
    if system.space == "circle":
        if exact:
            ints, den = _common_scale([p.angle for p in a] + [p.angle for p in b])
            va, vb = _int_array(ints[:n], (n,)), _int_array(ints[n:], (m,))
            t = np.abs(va[:, None] - vb[None, :]) % den
            return CostMatrix(2 * np.minimum(t, den - t), den)
        va = np.array([float(p.angle) for p in a])
        vb = np.array([float(p.angle) for p in b])
        t = np.abs(va[:, None] - vb[None, :]) % 1.0
        return CostMatrix(2 * np.minimum(t, 1.0 - t))
    if system.space == "shift":
        if exact:
            cache: dict = {}
            fr = []
            for p in a:
                for q in b:
                    key = (p, q)
                    if key not in cache:
                        cache[key] = shift_distance(p, q)
                    fr.append(cache[key])
            ints, den = _common_scale(fr)
            return CostMatrix(_int_array(ints, (n, m)), den)
        wa = np.array([p.window(FLOAT_SHIFT_WINDOW) for p in a], dtype=np.int16)
        wb = np.array([q.window(FLOAT_SHIFT_WINDOW) for q in b], dtype=np.int16)
        weights = 0.5 ** np.arange(1, FLOAT_SHIFT_WINDOW + 1)
        diff = wa[:, None, :] != wb[None, :, :]
        return CostMatrix(diff @ weights)
    raise ValidationError(f"unknown space {system.space!r}")


# --------------------------------------------------------------------------
# assignment


def hungarian(c: np.ndarray) -> list[int]:
    """Optimal assignment by the O(n^3) shortest-augmenting-path Hungarian method.

    Works on int64, float or object (Python int / Fraction) arrays; all
    comparisons are exact for integer and rational input.  Returns
    ``perm`` with row ``i`` matched to column ``perm[i]``.
    """
    c = np.asarray(c)
    n = c.shape[0]
    if c.dtype == object:
        inf = float("inf")
        zeros = lambda k: np.array([0] * k, dtype=object)  # noqa: E731
    elif np.issubdtype(c.dtype, np.integer):
        inf = np.int64(1) << np.int64(62)
        zeros = lambda k: np.zeros(k, dtype=np.int64)  # noqa: E731
    else:
        inf = np.inf
        zeros = lambda k: np.zeros(k, dtype=float)  # noqa: E731
    u, v = zeros(n + 1), zeros(n + 1)
    match = np.zeros(n + 1, dtype=np.int64)  # match[j] = row (1-based) on column j
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = np.full(n + 1, inf, dtype=u.dtype)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match[j0]
            free = ~used[1:]
            cur = c[i0 - 1] - u[i0] - v[1:]
            upd = free & (cur < minv[1:])
            minv[1:][upd] = cur[upd]
            way[1:][upd] = j0
            masked = np.where(free, minv[1:], inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[match[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    perm = [0] * n
    for j in range(1, n + 1):
        perm[match[j] - 1] = j - 1
    return perm


def assignment_cost(c: CostMatrix, method: str = "auto",
                    max_n: int = ASSIGNMENT_CAP) -> tuple[Real, list[int]]:
    """``min_σ (1/n) Σ_i C[i, σ(i)]`` and one optimal σ.

    ``method`` is ``"hungarian"`` (pure numpy solver), ``"lsa"`` (scipy's
    compiled solver) or ``"auto"``; auto uses scipy whenever its answer is
    exact (float input, or integer input small enough for binary64).
    """
    vals = c.values
    if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
        raise ValidationError(f"assignment needs a square matrix, got {vals.shape}")
    n = vals.shape[0]
    if n < 1:
        raise ValidationError("empty cost matrix")
    if n > max_n:
        raise CapExceededError(f"assignment size {n} exceeds cap {max_n}")
    if method == "auto":
        method = "lsa"
        if c.exact and int(np.max(np.abs(vals))) * n >= _EXACT_FLOAT_LIMIT:
            method = "hungarian"
    if method == "lsa":
        if c.exact and int(np.max(np.abs(vals))) * n >= _EXACT_FLOAT_LIMIT:
            raise ValidationError("entries too large for an exact binary64 solve")
        rows, cols = linear_sum_assignment(np.asarray(vals, dtype=float))
        perm = [0] * n
        for r, col in zip(rows, cols):
            perm[r] = int(col)
    elif method == "hungarian":
        perm = hungarian(vals)
    else:
        raise ValidationError(f"unknown assignment method {method!r}")
    return permutation_cost(c, perm), perm


def permutation_cost(c: CostMatrix, perm: Sequence[int]) -> Real:
    """Average cost ``(1/n) Σ C[i, perm[i]]`` of a fixed matching."""
    n = len(perm)
    if c.exact:
        total = sum(int(c.values[i, perm[i]]) for i in range(n))
        return Fraction(total, n * c.denom)
    return float(sum(float(c.values[i, perm[i]]) for i in range(n)) / n)


# --------------------------------------------------------------------------
# min-cost flow


@dataclass(frozen=True)
class TransportPlan:
    """Coupling as a list of ``(source index, target index, mass)`` arcs."""

    flows: tuple
    cost: Real

    def marginals(self, n: int, m: int) -> tuple[list[Fraction], list[Fraction]]:
        rows = [Fraction(0)] * n
        cols = [Fraction(0)] * m
        for i, j, w in self.flows:
            rows[i] += w
            cols[j] += w
        return rows, cols


def _scaled_weights(mu: DiscreteMeasure, nu: DiscreteMeasure) -> tuple[list[int], list[int], int]:
    ws = list(mu.weights) + list(nu.weights)
    den = math.lcm(*(w.denominator for w in ws))
    if den > WEIGHT_LCM_CAP:
        raise CapExceededError(f"weight common denominator {den} exceeds 2^31")
    s = [int(w * den) for w in mu.weights]
    t = [int(w * den) for w in nu.weights]
    return s, t, den


def min_cost_flow(supply: Sequence[int], demand: Sequence[int], cost: np.ndarray) -> np.ndarray:
    """Transportation problem by successive shortest augmenting paths.

    Dijkstra on reduced costs with node potentials (a super source S and
    super sink T are kept implicitly through their own potentials).  The
    returned integer flow matrix is optimal; on integer or object cost
    arrays every comparison is exact.
    """
    cost = np.asarray(cost)
    n, m = cost.shape
    if sum(supply) != sum(demand):
        raise ValidationError("supply and demand totals differ")
    if cost.dtype == object:
        inf = float("inf")
        cdt = object
    elif np.issubdtype(cost.dtype, np.integer):
        if n and m and int(np.max(np.abs(cost))) * 4 * (n + m + 2) >= _INT64_LIMIT:
            cost = cost.astype(object)
            inf, cdt = float("inf"), object
        else:
            inf, cdt = np.int64(1) << np.int64(62), np.int64
    else:
        inf, cdt = np.inf, float

    def zeros(k):
        return np.array([0] * k, dtype=object) if cdt is object else np.zeros(k, dtype=cdt)

    flow = np.zeros((n, m), dtype=np.int64)
    rs = np.array(supply, dtype=np.int64)
    rd = np.array(demand, dtype=np.int64)
    u, v = zeros(n), zeros(m)
    p_src, p_snk = 0, 0
    while rs.sum() > 0:
        ds = np.full(n, inf, dtype=cdt)
        dt = np.full(m, inf, dtype=cdt)
        done_s = np.zeros(n, dtype=bool)
        done_t = np.zeros(m, dtype=bool)
        pred_t = np.full(m, -1, dtype=np.int64)
        pred_s = np.full(n, -1, dtype=np.int64)
        roots = rs > 0
        ds[roots] = p_src - u[roots]
        d_sink, pred_sink = inf, -1
        while True:
            cand_s = np.where(done_s, inf, ds)
            i = int(np.argmin(cand_s))
            best_s = cand_s[i]
            cand_t = np.where(done_t, inf, dt)
            j = int(np.argmin(cand_t))
            best_t = cand_t[j]
            if d_sink <= best_s and d_sink <= best_t:
                break
            if best_s <= best_t:
                done_s[i] = True
                nd = best_s + cost[i] + u[i] - v
                upd = ~done_t & (nd < dt)
                dt[upd] = nd[upd]
                pred_t[upd] = i
            else:
                done_t[j] = True
                if rd[j] > 0:
                    cand = best_t + v[j] - p_snk
                    if cand < d_sink:
                        d_sink, pred_sink = cand, j
                back = (flow[:, j] > 0) & ~done_s
                if back.any():
                    nd = best_t - cost[:, j] + v[j] - u
                    upd = back & (nd < ds)
                    ds[upd] = nd[upd]
                    pred_s[upd] = j
        u = u + np.minimum(ds, d_sink)
        v = v + np.minimum(dt, d_sink)
        p_snk = p_snk + d_sink
        # walk back from T to S collecting the path and its bottleneck
        j = pred_sink
        path = []
        bottleneck = int(rd[j])
        while True:
            i = int(pred_t[j])
            path.append((i, j, 1))
            jj = int(pred_s[i])
            if jj < 0:
                bottleneck = min(bottleneck, int(rs[i]))
                root = i
                break
            path.append((i, jj, -1))
            bottleneck = min(bottleneck, int(flow[i, jj]))
            j = jj
        for i, j, sign in path:
            flow[i, j] += sign * bottleneck
        rs[root] -= bottleneck
        rd[pred_sink] -= bottleneck
    return flow


def w1_discrete(mu: DiscreteMeasure, nu: DiscreteMeasure, system: System,
                exact: bool | None = None) -> tuple[Real, TransportPlan]:
    """Optimal transport cost and plan between two finite measures (min-cost flow)."""
    if sum(mu.weights) != 1 or sum(nu.weights) != 1:
        raise ValidationError("measures must have total mass 1")
    c = cost_matrix(system, mu.support, nu.support, exact=exact)
    s, t, wden = _scaled_weights(mu, nu)
    flow = min_cost_flow(s, t, c.values)
    arcs = []
    for i, j in zip(*np.nonzero(flow)):
        arcs.append((int(i), int(j), Fraction(int(flow[i, j]), wden)))
    if c.exact:
        total = sum(int(flow[i, j]) * int(c.values[i, j]) for i, j, _ in arcs)
        cost = Fraction(total, wden * c.denom)
    else:
        cost = float(sum(float(w) * float(c.values[i, j]) for i, j, w in arcs))
    return cost, TransportPlan(tuple(arcs), cost)


# --------------------------------------------------------------------------
# one-dimensional closed forms


def w1_sorted_interval(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> Real:
    """``(1/n) Σ |x_(i) - y_(i)|`` over sorted atoms of two n-atom interval measures."""
    if mu.n != nu.n:
        raise ValidationError(f"atom counts differ ({mu.n} vs {nu.n})")
    for p in mu.atoms + nu.atoms:
        if not isinstance(p, IntervalPoint):
            raise ValidationError("w1_sorted_interval needs interval points")
    xs = sorted(p.value for p in mu.atoms)
    ys = sorted(p.value for p in nu.atoms)
    total = sum(abs(a - b) for a, b in zip(xs, ys))
    if isinstance(total, Fraction):
        return total / mu.n
    return float(total) / mu.n


def _signed_steps(mu: DiscreteMeasure, nu: DiscreteMeasure, key, exact: bool):
    conv = (lambda w: w) if exact else float
    jumps: dict = {}
    for p, w in mu.items():
        k = key(p) if exact else float(key(p))
        jumps[k] = jumps.get(k, 0) + conv(w)
    for p, w in nu.items():
        k = key(p) if exact else float(key(p))
        jumps[k] = jumps.get(k, 0) - conv(w)
    return sorted(jumps.items())


def w1_interval(mu: DiscreteMeasure, nu: DiscreteMeasure, exact: bool | None = None) -> Real:
    """``∫_0^1 |F_μ - F_ν|`` for weighted measures on [0,1]."""
    exact = _resolve_exact(list(mu.support) + list(nu.support), exact)
    steps = _signed_steps(mu, nu, lambda p: p.value, exact)
    total = Fraction(0) if exact else 0.0
    h = 0
    for (x0, w), (x1, _) in zip(steps, steps[1:]):
        h += w
        total += abs(h) * (x1 - x0)
    return total


def w1_circle(mu: DiscreteMeasure, nu: DiscreteMeasure, exact: bool | None = None) -> Real:
    """Transport cost on the circle under the doubled arc metric.

    Uses ``W1 = 2 · min_c ∫_0^1 |F_μ - F_ν - c|``; the optimal shift ``c``
    is a weighted median of the CDF difference.
    """
    exact = _resolve_exact(list(mu.support) + list(nu.support), exact)
    steps = _signed_steps(mu, nu, lambda p: p.angle, exact)
    one = Fraction(1) if exact else 1.0
    segments = []  # (value of F_mu - F_nu, length)
    h = 0
    for (x0, w), (x1, _) in zip(steps, steps[1:]):
        h += w
        segments.append((h, x1 - x0))
    segments.append((0, one - steps[-1][0] + steps[0][0]))
    segments.sort(key=lambda s: s[0])
    acc = 0
    c = segments[-1][0]
    for val, length in segments:
        acc += length
        if 2 * acc >= one:
            c = val
            break
    return 2 * sum(abs(val - c) * length for val, length in segments)


def gamma(mu: DiscreteMeasure, nu: DiscreteMeasure, system: System,
          exact: bool | None = None) -> Real:
    """Wasserstein-1 distance, choosing the fastest exact route for the space."""
    if system.space == "interval":
        for p in list(mu.support) + list(nu.support):
            system.check_point(p)
        return w1_interval(mu, nu, exact)
    if system.space == "circle":
        for p in list(mu.support) + list(nu.support):
            system.check_point(p)
        return w1_circle(mu, nu, exact)
    return w1_discrete(mu, nu, system, exact)[0]


def integrate(f, mu: DiscreteMeasure) -> Real:
    """``∫ f dμ`` for a finite measure."""
    return sum(w * f(p) for p, w in mu.items())


__all__ = [
    "CostMatrix", "TransportPlan", "cost_matrix", "assignment_cost", "hungarian",
    "permutation_cost", "min_cost_flow", "w1_discrete", "w1_sorted_interval",
    "w1_interval", "w1_circle", "gamma", "integrate", "ASSIGNMENT_CAP",
]
