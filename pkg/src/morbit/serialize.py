"""JSON documents for systems, points, measures, schedules, decompositions and results.

Rationals travel as ``"p/q"`` strings so exactness survives the round
trip; floats stay JSON numbers.  Every ``*_from_doc`` reader takes a
``field`` path and raises :class:`ConfigError` naming it on bad input.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from .decomp import DecompositionReport, LiftReport, PeriodicDecomposition
from .dynsys import (
    CirclePoint,
    CircleRotation,
    DiscreteMeasure,
    FullShift,
    GeneralInterval,
    IntervalPoint,
    PiecewiseLinear,
    ShiftPoint,
    System,
    convex_combination,
    logistic,
    random_shift_point,
    renormalization_model,
    swap_map,
    tent,
)
from .errors import ConfigError, MorbitError
from .periodic import (
    ClosableWitness,
    DensityWitness,
    IntervalBranchSource,
    LinkWitness,
    ListSource,
    PeriodicOrbit,
    SearchFailure,
    ShiftNecklaceSource,
    TruncationSource,
    periodic_orbit,
)
from .shadowing import BlockSchedule, BlockStage
from .transport import TransportPlan

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# --------------------------------------------------------------------------
# scalars


def real_to_doc(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return float(v)


def real_to_csv(v) -> str:
    """Rationals as ``p/q``; floats with 17 significant digits, '.' decimal."""
    if isinstance(v, (Fraction, int, np.integer)) and not isinstance(v, bool):
        return str(Fraction(v))
    return format(float(v), ".17g")


def real_from_doc(v, field: str):
    if isinstance(v, bool) or v is None:
        raise ConfigError(field, f"expected a number or 'p/q' string, got {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ConfigError(field, "number must be finite")
        return v
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            raise ConfigError(field, f"not a rational string: {v!r}") from None
    raise ConfigError(field, f"expected a number or 'p/q' string, got {type(v).__name__}")


def int_from_doc(v, field: str, minimum: int | None = 1) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(field, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(field, f"must be >= {minimum}, got {v}")
    return v


def require(doc: dict, key: str, field: str):
    if not isinstance(doc, dict):
        raise ConfigError(field, f"expected an object, got {type(doc).__name__}")
    if key not in doc:
        raise ConfigError(f"{field}.{key}", "required field is missing")
    return doc[key]


# --------------------------------------------------------------------------
# systems

SYSTEM_TYPES = ("tent", "swap_map", "renormalization_model", "piecewise_linear", "logistic",
                "circle_rotation", "full_shift")


def system_from_doc(doc, field: str = "system") -> System:
    kind = require(doc, "type", field)
    f = f"{field}"
    try:
        if kind == "tent":
            return tent()
        if kind == "swap_map":
            return swap_map()
        if kind == "renormalization_model":
            return renormalization_model(int_from_doc(doc.get("depth", 1), f + ".depth", 0))
        if kind == "piecewise_linear":
            return PiecewiseLinear(
                [real_from_doc(v, f"{f}.breakpoints[{i}]")
                 for i, v in enumerate(require(doc, "breakpoints", f))],
                [real_from_doc(v, f"{f}.slopes[{i}]")
                 for i, v in enumerate(require(doc, "slopes", f))],
                [real_from_doc(v, f"{f}.intercepts[{i}]")
                 for i, v in enumerate(require(doc, "intercepts", f))],
                name=doc.get("name"))
        if kind == "logistic":
            return logistic(float(real_from_doc(doc.get("r", 4.0), f + ".r")))
        if kind == "circle_rotation":
            a = require(doc, "alpha", f)
            alpha = GOLDEN if a == "golden" else real_from_doc(a, f + ".alpha")
            return CircleRotation(alpha)
        if kind == "full_shift":
            return FullShift(int_from_doc(doc.get("alphabet", 2), f + ".alphabet", 2))
    except ConfigError:
        raise
    except MorbitError as exc:
        raise ConfigError(field, str(exc)) from None
    raise ConfigError(f + ".type", f"unknown system type {kind!r}; expected one of {SYSTEM_TYPES}")


def system_to_doc(system: System) -> dict:
    if isinstance(system, PiecewiseLinear):
        return {"type": "piecewise_linear", "name": system.name,
                "breakpoints": [str(b) for b in system.breakpoints],
                "slopes": [str(s) for s in system.slopes],
                "intercepts": [str(c) for c in system.intercepts]}
    if isinstance(system, GeneralInterval):
        return {"type": system.name, **system.params}
    if isinstance(system, CircleRotation):
        return {"type": "circle_rotation", "alpha": real_to_doc(system.alpha)}
    if isinstance(system, FullShift):
        return {"type": "full_shift", "alphabet": system.alphabet}
    raise ConfigError("system", f"cannot serialise {system!r}")


# --------------------------------------------------------------------------
# points


def _parse_word(s: str, alphabet: int, field: str) -> ShiftPoint:
    s = s.strip()
    if s.count("(") != 1 or not s.endswith(")"):
        raise ConfigError(field, f"shift word must look like 'pre(period)', got {s!r}")
    pre, period = s[:-1].split("(")
    try:
        return ShiftPoint(pre, period, alphabet)
    except MorbitError as exc:
        raise ConfigError(field, str(exc)) from None


def point_from_doc(doc, system: System, field: str = "point", rng=None):
    try:
        if system.space == "shift":
            if isinstance(doc, str):
                return _parse_word(doc, system.alphabet, field)
            if isinstance(doc, dict) and "random" in doc:
                r = doc["random"]
                if rng is None:
                    raise ConfigError(field, "random point needs a seeded generator")
                return random_shift_point(rng, int_from_doc(require(r, "length", field + ".random"),
                                                            field + ".random.length"),
                                          str(r.get("tail", "0")), system.alphabet)
            if isinstance(doc, dict):
                return ShiftPoint(require(doc, "pre", field) if "pre" in doc else (),
                                  require(doc, "period", field), system.alphabet)
            raise ConfigError(field, "expected 'pre(period)' string or object")
        cls = IntervalPoint if system.space == "interval" else CirclePoint
        key = "value" if system.space == "interval" else "angle"
        if isinstance(doc, dict) and "random" in doc:
            if rng is None:
                raise ConfigError(field, "random point needs a seeded generator")
            return cls(float(rng.uniform(0.0, 1.0)))
        if isinstance(doc, dict):
            doc = require(doc, key, field)
        return cls(real_from_doc(doc, field))
    except ConfigError:
        raise
    except MorbitError as exc:
        raise ConfigError(field, str(exc)) from None


def point_to_doc(p):
    if isinstance(p, IntervalPoint):
        return real_to_doc(p.value)
    if isinstance(p, CirclePoint):
        return real_to_doc(p.angle)
    if isinstance(p, ShiftPoint):
        if p.alphabet <= 10:
            return p.word()
        return {"pre": list(p.pre), "period": list(p.period)}
    raise ConfigError("point", f"cannot serialise {p!r}")


def points_from_doc(doc, system: System, field: str, rng=None) -> list:
    if not isinstance(doc, list) or not doc:
        raise ConfigError(field, "expected a nonempty list of points")
    return [point_from_doc(d, system, f"{field}[{i}]", rng) for i, d in enumerate(doc)]


# --------------------------------------------------------------------------
# measures


def measure_from_doc(doc, system: System, field: str = "measure", rng=None) -> DiscreteMeasure:
    if not isinstance(doc, dict):
        raise ConfigError(field, "measure must be an object")
    try:
        if "dirac" in doc:
            return DiscreteMeasure.dirac(point_from_doc(doc["dirac"], system, field + ".dirac", rng))
        if "orbit" in doc:
            x = point_from_doc(doc["orbit"], system, field + ".orbit", rng)
            return periodic_orbit(system, x).measure
        if "mixture" in doc:
            parts = []
            for i, part in enumerate(doc["mixture"]):
                f = f"{field}.mixture[{i}]"
                w = real_from_doc(require(part, "weight", f), f + ".weight")
                parts.append((Fraction(w), measure_from_doc(require(part, "measure", f),
                                                            system, f + ".measure", rng)))
            return convex_combination(parts)
        sup = points_from_doc(require(doc, "support", field), system, field + ".support", rng)
        ws = require(doc, "weights", field)
        if not isinstance(ws, list) or len(ws) != len(sup):
            raise ConfigError(field + ".weights", "need one weight per support point")
        return DiscreteMeasure(tuple(sup), tuple(
            Fraction(real_from_doc(w, f"{field}.weights[{i}]")) for i, w in enumerate(ws)))
    except ConfigError:
        raise
    except MorbitError as exc:
        raise ConfigError(field, str(exc)) from None


def measure_to_doc(mu: DiscreteMeasure) -> dict:
    return {"support": [point_to_doc(p) for p in mu.support],
            "weights": [str(w) for w in mu.weights]}


def plan_to_doc(plan: TransportPlan) -> dict:
    return {"cost": real_to_doc(plan.cost),
            "arcs": [{"from": i, "to": j, "mass": str(w)} for i, j, w in plan.flows]}


# --------------------------------------------------------------------------
# periodic-orbit sources


def source_from_doc(doc, system: System, field: str = "source", rng=None, default_point=None):
    """Periodic-orbit source; a truncation source without ``of`` closes ``default_point``."""
    if doc is None:
        if system.space == "shift":
            return ShiftNecklaceSource(system.alphabet)
        if isinstance(system, PiecewiseLinear):
            return IntervalBranchSource(system)
        raise ConfigError(field, f"no default periodic source for {system!r}")
    kind = require(doc, "type", field)
    if kind == "shift_necklaces":
        if system.space != "shift":
            raise ConfigError(field + ".type", "shift_necklaces needs a full_shift system")
        return ShiftNecklaceSource(system.alphabet)
    if kind == "interval_branches":
        if not isinstance(system, PiecewiseLinear):
            raise ConfigError(field + ".type", "interval_branches needs a piecewise-linear map")
        return IntervalBranchSource(system)
    if kind == "truncation":
        if system.space != "shift":
            raise ConfigError(field + ".type", "truncation needs a full_shift system")
        if "of" not in doc:
            if default_point is None:
                raise ConfigError(field + ".of", "required field is missing")
            return TruncationSource(default_point)
        return TruncationSource(point_from_doc(doc["of"], system, field + ".of", rng))
    if kind == "list":
        pts = points_from_doc(require(doc, "points", field), system, field + ".points", rng)
        try:
            return ListSource([periodic_orbit(system, p) for p in pts])
        except MorbitError as exc:
            raise ConfigError(field + ".points", str(exc)) from None
    raise ConfigError(field + ".type", f"unknown source type {kind!r}")


ORBIT_LISTING_MAX = 32


def orbit_to_doc(o: PeriodicOrbit) -> dict:
    """Base point and period; the full cycle is listed for short periods only."""
    doc = {"base": point_to_doc(o.base), "period": o.period}
    if o.period <= ORBIT_LISTING_MAX:
        doc["orbit"] = [point_to_doc(p) for p in o.orbit]
    return doc


# --------------------------------------------------------------------------
# schedules and decompositions


def schedule_from_doc(doc, system: System, field: str = "schedule", rng=None) -> BlockSchedule:
    stages_doc = require(doc, "stages", field)
    if not isinstance(stages_doc, list) or not stages_doc:
        raise ConfigError(field + ".stages", "expected a nonempty list of stages")
    stages = []
    for i, sd in enumerate(stages_doc):
        f = f"{field}.stages[{i}]"
        mu = measure_from_doc(require(sd, "measure", f), system, f + ".measure", rng)
        gps = points_from_doc(require(sd, "generic_points", f), system, f + ".generic_points", rng)
        q = int_from_doc(require(sd, "q", f), f + ".q")
        eps = sd.get("eps")
        eps = None if eps is None else real_from_doc(eps, f + ".eps")
        try:
            stages.append(BlockStage(mu, gps, q, eps))
        except MorbitError as exc:
            raise ConfigError(f, str(exc)) from None
    try:
        return BlockSchedule(stages, doc.get("mode", "relaxed"),
                             int_from_doc(doc.get("tail_repeats", 1), field + ".tail_repeats"))
    except ConfigError:
        raise
    except MorbitError as exc:
        raise ConfigError(field, str(exc)) from None


def schedule_to_doc(s: BlockSchedule) -> dict:
    return {"mode": s.mode, "tail_repeats": s.tail_repeats,
            "stages": [{"measure": measure_to_doc(st.measure),
                        "generic_points": [point_to_doc(p) for p in st.generic_points],
                        "q": st.q,
                        **({"eps": real_to_doc(st.eps)} if st.eps is not None else {})}
                       for st in s.stages]}


def decomposition_from_doc(doc, field: str = "decomposition") -> PeriodicDecomposition:
    try:
        if isinstance(doc, dict) and "split" in doc:
            return PeriodicDecomposition.split(real_from_doc(doc["split"], field + ".split"))
        k = int_from_doc(require(doc, "k", field), field + ".k")
        sets = require(doc, "sets", field)
        if not isinstance(sets, list):
            raise ConfigError(field + ".sets", "expected a list of interval lists")
        parsed = []
        for i, s in enumerate(sets):
            if not isinstance(s, list):
                raise ConfigError(f"{field}.sets[{i}]", "expected a list of [lo, hi] pairs")
            ivs = []
            for j, iv in enumerate(s):
                f = f"{field}.sets[{i}][{j}]"
                if not isinstance(iv, list) or len(iv) != 2:
                    raise ConfigError(f, "expected [lo, hi]")
                ivs.append(tuple(real_from_doc(v, f) for v in iv))
            parsed.append(tuple(ivs))
        return PeriodicDecomposition(k, tuple(parsed))
    except ConfigError:
        raise
    except MorbitError as exc:
        raise ConfigError(field, str(exc)) from None


def decomposition_to_doc(d: PeriodicDecomposition) -> dict:
    return {"k": d.k, "sets": [[[str(lo), str(hi)] for lo, hi in s] for s in d.sets]}


# --------------------------------------------------------------------------
# results


def result_to_doc(r) -> dict:
    if isinstance(r, DensityWitness):
        return {"found": True, "n": r.n, "cost": real_to_doc(r.cost), "eps": real_to_doc(r.eps),
                "target": r.target, "explored": r.explored, "orbit": orbit_to_doc(r.orbit)}
    if isinstance(r, ClosableWitness):
        return {"found": True, "p": r.p, "q": r.q, "y": point_to_doc(r.y),
                "sup_distance": real_to_doc(r.sup_distance), "eps": real_to_doc(r.eps)}
    if isinstance(r, LinkWitness):
        return {"found": True, "p1": r.p1, "p2": r.p2, "q1": r.q1, "q2": r.q2,
                "z": orbit_to_doc(r.z), "cost": real_to_doc(r.cost),
                "eps": real_to_doc(r.eps), "lambda": real_to_doc(r.lam)}
    if isinstance(r, SearchFailure):
        best = None
        if r.best is not None:
            best = {}
            for k, v in sorted(r.best.items()):
                if isinstance(v, PeriodicOrbit):
                    best[k] = orbit_to_doc(v)
                elif isinstance(v, (IntervalPoint, CirclePoint, ShiftPoint)):
                    best[k] = point_to_doc(v)
                else:
                    best[k] = v
        return {"found": False, "best_cost": None if r.best_cost is None else real_to_doc(r.best_cost),
                "best": best, "eps": real_to_doc(r.eps), "target": r.target,
                "explored": r.explored, "caps": r.caps}
    if isinstance(r, DecompositionReport):
        ivs = lambda xs: [[str(a), str(b)] for a, b in xs]  # noqa: E731
        return {"valid": r.valid, "exact": r.exact, "covers": r.covers,
                "uncovered": ivs(r.uncovered),
                "violations": [{"set": i, "outside": [str(a), str(b)]} for i, a, b in r.violations],
                "images": [ivs(img) for img in r.images]}
    if isinstance(r, LiftReport):
        return {"k": r.k, "n": r.n, "power_cost": real_to_doc(r.power_cost),
                "lifted_cost": real_to_doc(r.lifted_cost),
                "induced_cost": real_to_doc(r.induced_cost),
                "amplification_bound": None if r.amplification_bound is None
                else real_to_doc(r.amplification_bound),
                "consistent": r.consistent}
    raise TypeError(f"no document form for {type(r).__name__}")


def dumps(doc) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=True, allow_nan=False) + "\n"
