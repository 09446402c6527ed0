"""Batch experiment runner: ``morbit run|validate|describe``.

One JSON config describes one experiment.  Outputs go to ``--out-dir`` as
``<kind>.json`` (always) and ``<kind>.csv`` (for tabular kinds); both
embed the sha256 of the effective config and the library version, and
are byte-identical for identical configs.

Exit codes: 0 success, 2 invalid config, 3 cap exhausted / search failed
(the best-effort report is still written).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .decomp import lift_report, verify_decomposition
from .dynsys import System, tent_generic_orbit, to_float
from .errors import CapExceededError, ConfigError, MorbitError
from .periodic import (
    HORIZON_CAP,
    PERIOD_CAP,
    WITNESS_ASSIGNMENT_CAP,
    SearchFailure,
    check_closable,
    check_density_convex,
    check_linkable_pair,
    periodic_orbit,
)
from .pseudometric import (
    DEFAULT_BINS,
    DEFAULT_CYLINDER,
    besicovitch_finite,
    doubling_horizons,
    ebar_estimate,
    vset_estimate,
)
from .serialize import (
    decomposition_from_doc,
    decomposition_to_doc,
    dumps,
    int_from_doc,
    measure_from_doc,
    measure_to_doc,
    plan_to_doc,
    point_from_doc,
    point_to_doc,
    real_from_doc,
    real_to_csv,
    real_to_doc,
    require,
    result_to_doc,
    schedule_from_doc,
    schedule_to_doc,
    source_from_doc,
    system_from_doc,
)
from .shadowing import (
    TRACE_CAP,
    build_aapo,
    chain_realization,
    check_prefix_bound,
    is_aapo,
    schedule_validate,
    subsample_horizons,
    symbol_stream,
    trace_error,
)
from .transport import w1_discrete

EXIT_OK, EXIT_INVALID, EXIT_CAP = 0, 2, 3


@dataclass
class Context:
    cfg: dict
    system: System
    rng: np.random.Generator
    exact: bool | None
    threads: int

    def point(self, doc, fld):
        p = point_from_doc(doc, self.system, fld, self.rng)
        return to_float(p) if self.exact is False else p

    def points(self, doc, fld):
        if not isinstance(doc, list) or not doc:
            raise ConfigError(fld, "expected a nonempty list of points")
        return [self.point(d, f"{fld}[{i}]") for i, d in enumerate(doc)]

    def measure(self, doc, fld):
        return measure_from_doc(doc, self.system, fld, self.rng)

    def get_int(self, key, default, minimum=1):
        return int_from_doc(self.cfg.get(key, default), key, minimum)

    def horizons(self, key="horizons", default_stop=None):
        doc = self.cfg.get(key)
        if doc is None:
            if default_stop is None:
                raise ConfigError(key, "required field is missing")
            doc = {"start": 4, "stop": default_stop}
        if isinstance(doc, dict):
            start = int_from_doc(doc.get("start", 4), f"{key}.start")
            stop = int_from_doc(require(doc, "stop", key), f"{key}.stop")
            hs = doubling_horizons(start, stop)
        elif isinstance(doc, list):
            hs = [int_from_doc(h, f"{key}[{i}]") for i, h in enumerate(doc)]
        else:
            raise ConfigError(key, "expected a list of integers or {start, stop}")
        if not hs or any(a >= b for a, b in zip(hs, hs[1:])):
            raise ConfigError(key, "horizons must be nonempty and strictly increasing")
        return hs


@dataclass
class Outcome:
    doc: dict
    csv_header: list | None = None
    csv_rows: list = field(default_factory=list)
    status: int = EXIT_OK
    extra: dict = field(default_factory=dict)  # file suffix -> bytes


# --------------------------------------------------------------------------
# experiment kinds: prepare(ctx) validates the config and returns execute()


def _prep_dist(ctx: Context):
    cfg, sysm = ctx.cfg, ctx.system
    if "x" in cfg or "y" in cfg:
        x, y = ctx.point(require(cfg, "x", "config"), "x"), ctx.point(require(cfg, "y", "config"), "y")
        return lambda: Outcome({"distance": real_to_doc(sysm.dist(x, y))})
    mu = ctx.measure(require(cfg, "mu", "config"), "mu")
    nu = ctx.measure(require(cfg, "nu", "config"), "nu")

    def run():
        cost, plan = w1_discrete(mu, nu, sysm, exact=ctx.exact)
        return Outcome({"gamma": real_to_doc(cost), "plan": plan_to_doc(plan),
                        "mu": measure_to_doc(mu), "nu": measure_to_doc(nu)})
    return run


def _mapper(ctx: Context):
    if ctx.threads > 1:
        return ThreadPoolExecutor(max_workers=ctx.threads)
    return nullcontext(None)


def _prep_ebar(ctx: Context):
    cfg = ctx.cfg
    x, y = ctx.point(require(cfg, "x", "config"), "x"), ctx.point(require(cfg, "y", "config"), "y")
    hs = ctx.horizons()
    tw = ctx.get_int("tail_window", min(3, len(hs)))
    if tw > len(hs):
        raise ConfigError("tail_window", "larger than the number of horizons")
    want_b = bool(cfg.get("besicovitch", False))

    def run():
        with _mapper(ctx) as ex:
            est = ebar_estimate(ctx.system, x, y, hs, tw, ctx.exact,
                                mapper=ex.map if ex else map)
        doc = {"horizons": list(hs), "values": [real_to_doc(v) for v in est.values],
               "limsup_estimate": real_to_doc(est.limsup_estimate), "tail_window": tw}
        if want_b:
            doc["besicovitch"] = [real_to_doc(besicovitch_finite(ctx.system, x, y, h)) for h in hs]
        rows = [[h, real_to_csv(v)] for h, v in est.rows()]
        return Outcome(doc, ["horizon", "value"], rows)
    return run


def _prep_vset(ctx: Context):
    cfg = ctx.cfg
    x = ctx.point(require(cfg, "x", "config"), "x")
    cps = ctx.horizons("checkpoints")
    bins = ctx.get_int("bins", DEFAULT_BINS)
    cyl = ctx.get_int("cylinder", DEFAULT_CYLINDER)

    def run():
        est = vset_estimate(ctx.system, x, cps, bins, cyl, ctx.exact)
        rows = [[a, b, real_to_csv(est.pairwise_gamma[i][j])]
                for i, a in enumerate(cps) for j, b in enumerate(cps) if i < j]
        doc = {"checkpoints": list(cps), "coarsening_error": real_to_doc(est.coarsening_error),
               "snapshots": [measure_to_doc(m) for m in est.snapshots],
               "pairwise_gamma": [[real_to_doc(v) for v in row] for row in est.pairwise_gamma]}
        return Outcome(doc, ["checkpoint_a", "checkpoint_b", "gamma"], rows)
    return run


def _target(ctx: Context, doc, fld):
    if isinstance(doc, dict) and "tent_generic_orbit" in doc:
        n = int_from_doc(require(doc["tent_generic_orbit"], "length", fld + ".tent_generic_orbit"),
                         fld + ".tent_generic_orbit.length")
        return tent_generic_orbit(n, ctx.rng)
    return ctx.point(doc, fld)


def _search_status(res):
    return EXIT_CAP if isinstance(res, SearchFailure) else EXIT_OK


def _prep_density(ctx: Context):
    cfg = ctx.cfg
    tdocs = cfg["targets"] if "targets" in cfg else [require(cfg, "target", "config")]
    if not isinstance(tdocs, list) or not tdocs:
        raise ConfigError("targets", "expected a nonempty list of targets")
    ys = [_target(ctx, d, f"targets[{i}]") for i, d in enumerate(tdocs)]
    eps = real_from_doc(require(cfg, "eps", "config"), "eps")
    N = ctx.get_int("N", 1)
    first = ys[0] if not isinstance(ys[0], list) else None
    src = source_from_doc(cfg.get("source"), ctx.system, "source", ctx.rng, first)
    caps = dict(period_cap=ctx.get_int("period_cap", PERIOD_CAP),
                horizon_cap=ctx.get_int("horizon_cap", HORIZON_CAP),
                assignment_cap=ctx.get_int("assignment_cap", WITNESS_ASSIGNMENT_CAP),
                max_multiples=ctx.get_int("max_multiples", 4))

    def run():
        res = check_density_convex(ctx.system, src, ys, eps, N, exact=ctx.exact, **caps)
        return Outcome({"result": result_to_doc(res), "k": len(ys), "N": N,
                        "source": src.describe()}, status=_search_status(res))
    return run


def _prep_closable(ctx: Context):
    cfg = ctx.cfg
    x = ctx.point(require(cfg, "x", "config"), "x")
    eps = real_from_doc(require(cfg, "eps", "config"), "eps")
    N = ctx.get_int("N", 1)
    src = source_from_doc(cfg.get("source"), ctx.system, "source", ctx.rng, x)
    caps = dict(period_cap=ctx.get_int("period_cap", PERIOD_CAP),
                horizon_cap=ctx.get_int("horizon_cap", HORIZON_CAP),
                max_multiples=ctx.get_int("max_multiples", 8))

    def run():
        res = check_closable(ctx.system, src, x, eps, N, **caps)
        return Outcome({"result": result_to_doc(res), "N": N, "source": src.describe()},
                       status=_search_status(res))
    return run


def _prep_linkable(ctx: Context):
    cfg = ctx.cfg
    try:
        y1 = periodic_orbit(ctx.system, ctx.point(require(cfg, "y1", "config"), "y1"))
        y2 = periodic_orbit(ctx.system, ctx.point(require(cfg, "y2", "config"), "y2"))
    except ConfigError:
        raise
    except MorbitError as exc:
        raise ConfigError("y1/y2", str(exc)) from None
    lam = real_from_doc(require(cfg, "lambda", "config"), "lambda")
    eps = real_from_doc(require(cfg, "eps", "config"), "eps")
    src = source_from_doc(cfg.get("source"), ctx.system, "source", ctx.rng)
    period_cap = ctx.get_int("period_cap", PERIOD_CAP)
    acap = ctx.get_int("assignment_cap", WITNESS_ASSIGNMENT_CAP)

    def run():
        res = check_linkable_pair(ctx.system, y1, y2, lam, eps, src, period_cap, acap,
                                  exact=ctx.exact)
        return Outcome({"result": result_to_doc(res), "source": src.describe()},
                       status=_search_status(res))
    return run


def _schedule_report_doc(rep) -> dict:
    return {"valid": rep.valid, "mode": rep.mode, "strict_ok": rep.strict_ok,
            "violations": rep.violations, "warnings": rep.warnings,
            "P": list(rep.P), "Q": list(rep.Q),
            "eps": [None if e is None else real_to_doc(e) for e in rep.eps],
            "certified_gamma": [real_to_doc(g) for g in rep.certified_gamma]}


def _prep_aapo(ctx: Context):
    cfg = ctx.cfg
    sch = schedule_from_doc(require(cfg, "schedule", "config"), ctx.system, "schedule", ctx.rng)
    horizon = cfg.get("horizon")
    if horizon is not None:
        horizon = int_from_doc(horizon, "horizon")
        if horizon > sch.length:
            raise ConfigError("horizon", f"{horizon} exceeds schedule length Q_S = {sch.length}")
    L = horizon or sch.length
    if L < 2:
        raise ConfigError("schedule", "schedule must produce at least two points")
    hs = ctx.horizons(default_stop=L - 1) if "horizons" in cfg else \
        sorted(set(doubling_horizons(1, L - 1)) | {L - 1})
    if hs[-1] > L - 1:
        raise ConfigError("horizons", f"horizons must be <= {L - 1}")
    thr = real_from_doc(cfg.get("threshold", "1/50"), "threshold")
    bins = ctx.get_int("bins", DEFAULT_BINS)
    cyl = ctx.get_int("cylinder", DEFAULT_CYLINDER)
    export = cfg.get("export", {})
    if not isinstance(export, dict):
        raise ConfigError("export", "expected an object with 'points'/'stream' flags")
    if export.get("stream") and ctx.system.space != "shift":
        raise ConfigError("export.stream", "symbol streams are only defined for shift systems")
    rep = schedule_validate(ctx.system, sch)
    if not rep.valid:
        raise ConfigError("schedule", "; ".join(rep.violations))

    def run():
        seq = build_aapo(ctx.system, sch, horizon, validate=False)
        verdict = is_aapo(ctx.system, seq.points, hs, thr)
        chain = chain_realization(ctx.system, seq, bins, cyl, ctx.exact)
        doc = {"schedule": schedule_to_doc(sch), "schedule_report": _schedule_report_doc(rep),
               "length": len(seq),
               "final_jump_average": real_to_doc(seq.jump_averages[-1]),
               "aapo": {"threshold": real_to_doc(thr), "below_threshold": verdict.below_threshold,
                        "decreasing": verdict.decreasing},
               "chain": [{"n": r.n, "Q": r.Q, "eps": None if r.eps is None else real_to_doc(r.eps),
                          "bound": None if r.bound is None else real_to_doc(r.bound),
                          "raw_gamma": None if r.raw_gamma is None else real_to_doc(r.raw_gamma),
                          "coarse_gamma": real_to_doc(r.coarse_gamma),
                          "coarsening_error": real_to_doc(r.coarsening_error),
                          "holds": r.holds} for r in chain]}
        if sch.mode == "strict":
            bad = check_prefix_bound(seq)
            doc["prefix_bound"] = {"holds": not bad, "violations": bad[:20]}
        extra = {}
        if export.get("points"):
            doc["points"] = [point_to_doc(p) for p in seq.points]
        if export.get("stream"):
            extra["stream.bin"] = symbol_stream(seq.points)
        rows = [[h, real_to_csv(v)] for h, v in zip(verdict.horizons, verdict.averages)]
        return Outcome(doc, ["horizon", "jump_average"], rows, extra=extra)
    return run


def _sequence(ctx: Context, doc, fld):
    if isinstance(doc, dict) and "schedule" in doc:
        sch = schedule_from_doc(doc["schedule"], ctx.system, fld + ".schedule", ctx.rng)
        h = doc.get("horizon")
        h = None if h is None else int_from_doc(h, fld + ".horizon")
        try:
            return list(build_aapo(ctx.system, sch, h).points)
        except MorbitError as exc:
            raise ConfigError(fld, str(exc)) from None
    return ctx.points(doc, fld)


def _prep_trace(ctx: Context):
    cfg = ctx.cfg
    seq = _sequence(ctx, require(cfg, "sequence", "config"), "sequence")
    x = ctx.point(require(cfg, "x", "config"), "x")
    hs = ctx.horizons(default_stop=len(seq))
    if hs[-1] > len(seq):
        raise ConfigError("horizons", f"horizons must be <= sequence length {len(seq)}")
    cap = ctx.get_int("cap", TRACE_CAP)

    def run():
        kept = subsample_horizons(hs, cap)
        skipped = [h for h in hs if h > cap]
        if not kept:
            return Outcome({"error": f"every horizon exceeds the trace cap {cap}",
                            "skipped_horizons": skipped}, status=EXIT_CAP)
        with _mapper(ctx) as ex:
            rep = trace_error(ctx.system, seq, x, kept, cap, ctx.exact,
                              mapper=ex.map if ex else map)
        rows = [[h, real_to_csv(c), real_to_csv(i)]
                for h, c, i in zip(rep.horizons, rep.costs, rep.identity_costs)]
        doc = {"horizons": list(rep.horizons), "costs": [real_to_doc(c) for c in rep.costs],
               "identity_costs": [real_to_doc(c) for c in rep.identity_costs],
               "skipped_horizons": skipped, "cap": cap}
        return Outcome(doc, ["horizon", "trace", "identity"], rows,
                       status=EXIT_CAP if skipped else EXIT_OK)
    return run


def _prep_decomp(ctx: Context):
    cfg = ctx.cfg
    if ctx.system.space != "interval":
        raise ConfigError("system", "decompositions need an interval system")
    d = decomposition_from_doc(require(cfg, "decomposition", "config"))
    lift = cfg.get("lift")
    if lift is not None:
        lx = ctx.point(require(lift, "x", "lift"), "lift.x")
        ly = ctx.point(require(lift, "y", "lift"), "lift.y")
        ln = int_from_doc(require(lift, "n", "lift"), "lift.n")
        lk = int_from_doc(lift.get("k", d.k), "lift.k")
        lcap = int_from_doc(lift.get("cap", 1024), "lift.cap")

    def run():
        doc = {"decomposition": decomposition_to_doc(d),
               "report": result_to_doc(verify_decomposition(ctx.system, d))}
        if lift is not None:
            doc["lift"] = result_to_doc(lift_report(ctx.system, d, lx, ly, ln, lk, lcap, ctx.exact))
        return Outcome(doc)
    return run


KINDS = {
    "dist": (_prep_dist, """Distance between two points, or W1 between two measures.
  required: system, and either x + y (points) or mu + nu (measures)
  output:   dist.json {distance} or {gamma, plan{cost, arcs[{from,to,mass}]}, mu, nu}"""),
    "ebar": (_prep_ebar, """Finite-horizon mean orbital pseudo-metric between two orbits.
  required: system, x, y, horizons ([n, ...] or {start, stop} doubling)
  optional: tail_window (3), besicovitch (false)
  output:   ebar.csv  columns horizon,value
            ebar.json {horizons, values, limsup_estimate, tail_window[, besicovitch]}"""),
    "vset": (_prep_vset, """Coarsened empirical-measure snapshots of one orbit.
  required: system, x, checkpoints
  optional: bins (64), cylinder (6)
  output:   vset.csv  columns checkpoint_a,checkpoint_b,gamma
            vset.json {checkpoints, snapshots, pairwise_gamma, coarsening_error}"""),
    "density": (_prep_density, """Bounded search for a periodic witness of the density condition.
  required: system, targets (list of points; a single target = ergodic form), eps
  optional: N (1), source, period_cap (12), horizon_cap (4096),
            assignment_cap (1024), max_multiples (4)
            target entries may be {"tent_generic_orbit": {"length": n}} (seeded float orbit)
  source:   {"type": "shift_necklaces"|"interval_branches"|"list"|"truncation", ...};
            a truncation source without "of" closes up the first target
  output:   density.json {result{found, ...}}; exit 3 with the best candidate if none found"""),
    "closable": (_prep_closable, """Bounded search for a closing periodic orbit of x.
  required: system, x, eps
  optional: N (1), source, period_cap (12), horizon_cap (4096), max_multiples (8)
  output:   closable.json {result{found, p, q, y, sup_distance | best}}; exit 3 on failure"""),
    "linkable": (_prep_linkable, """Bounded search linking two periodic orbits in proportion lambda.
  required: system, y1, y2 (periodic points), lambda, eps
  optional: source, period_cap (12), assignment_cap (1024)
  output:   linkable.json {result{found, p1, p2, q1, q2, z, cost | best}}; exit 3 on failure"""),
    "aapo": (_prep_aapo, """Build a block pseudo-orbit from a schedule and certify it.
  required: system, schedule {mode, tail_repeats, stages[{measure, generic_points, q, eps?}]}
  optional: horizon (Q_S), horizons, threshold ("1/50"), bins (64), cylinder (6),
            export {points: bool, stream: bool (shift only)}
  output:   aapo.csv  columns horizon,jump_average
            aapo.json {schedule_report, final_jump_average, aapo, chain[...], prefix_bound?}
            aapo.stream.bin one byte per symbol when export.stream is set"""),
    "trace": (_prep_trace, """Min-permutation tracing cost of a sequence by the orbit of x.
  required: system, sequence (list of points or {schedule, horizon?}), x
  optional: horizons (doubling to the length), cap (1024; larger horizons are skipped)
  output:   trace.csv  columns horizon,trace,identity
            trace.json {horizons, costs, identity_costs, skipped_horizons}; exit 3 if any skipped"""),
    "decomp": (_prep_decomp, """Verify a periodic decomposition of an interval map.
  required: system (interval), decomposition {k, sets[[[lo, hi], ...], ...]} or {split: c}
  optional: lift {x, y, n, k?, cap?} compares T^k-level and T-level witness costs
  output:   decomp.json {decomposition, report{valid, exact, covers, violations}, lift?}"""),
}

COMMON = """common fields: kind, system, seed (64-bit, default 0), exact (true|false|null)
systems: tent | swap_map | renormalization_model{depth} | piecewise_linear{breakpoints,
  slopes, intercepts} | logistic{r} | circle_rotation{alpha | "golden"} | full_shift{alphabet}
points: "p/q" or number (interval/circle), "pre(period)" (shift), {"random": {...}}
measures: {support, weights} | {dirac: p} | {orbit: p} | {mixture: [{weight, measure}]}
"""


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(dumps(cfg).encode()).hexdigest()


def prepare(cfg, seed=None, exact_flag=None, threads=1):
    """Validate a config document; return ``(context, execute)``."""
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be a JSON object")
    cfg = dict(cfg)
    kind = require(cfg, "kind", "config")
    if kind not in KINDS:
        raise ConfigError("kind", f"unknown experiment kind {kind!r}; expected one of {sorted(KINDS)}")
    if seed is not None:
        cfg["seed"] = seed
    if exact_flag is not None:
        cfg["exact"] = exact_flag
    s = cfg.get("seed", 0)
    if isinstance(s, bool) or not isinstance(s, int) or not 0 <= s < 2 ** 64:
        raise ConfigError("seed", "seed must be an integer in [0, 2^64)")
    ex = cfg.get("exact")
    if ex is not None and not isinstance(ex, bool):
        raise ConfigError("exact", "expected true, false or null")
    if threads < 1:
        raise ConfigError("--threads", "must be >= 1")
    system = system_from_doc(require(cfg, "system", "config"))
    ctx = Context(cfg, system, np.random.default_rng(s), ex, threads)
    try:
        execute = KINDS[kind][0](ctx)
    except ConfigError:
        raise
    except MorbitError as exc:
        raise ConfigError(kind, str(exc)) from None
    return ctx, execute


def _csv_text(header, rows, meta) -> str:
    buf = io.StringIO()
    buf.write(f"# morbit {meta['version']} config_sha256={meta['config_sha256']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def run(cfg, out_dir, seed=None, exact_flag=None, threads=1) -> int:
    ctx, execute = prepare(cfg, seed, exact_flag, threads)
    kind = ctx.cfg["kind"]
    h = config_hash(ctx.cfg)
    meta = {"config_sha256": h, "version": __version__, "kind": kind, "seed": ctx.cfg.get("seed", 0)}
    try:
        out = execute()
    except CapExceededError as exc:
        out = Outcome({"error": str(exc), "status": "cap_exceeded"}, status=EXIT_CAP)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {"meta": meta, "status": out.status, **out.doc}
    (out_dir / f"{kind}.json").write_text(dumps(doc), encoding="utf-8")
    if out.csv_header is not None:
        (out_dir / f"{kind}.csv").write_text(_csv_text(out.csv_header, out.csv_rows, meta),
                                             encoding="utf-8")
    for suffix, data in out.extra.items():
        # binary payloads carry the config hash in their file name
        stem, ext = suffix.rsplit(".", 1)
        (out_dir / f"{kind}.{stem}.{h[:16]}.{ext}").write_bytes(data)
    return out.status


def _load(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"malformed JSON at line {exc.lineno} column {exc.colno}: "
                                    f"{exc.msg}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="morbit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"morbit {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("config", help="experiment config (JSON)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads for per-horizon work")
        g = p.add_mutually_exclusive_group()
        g.add_argument("--exact", dest="exact", action="store_const", const=True, default=None,
                       help="rational arithmetic throughout")
        g.add_argument("--float", dest="exact", action="store_const", const=False,
                       help="binary64 points and costs")

    r = sub.add_parser("run", help="run an experiment")
    common(r)
    r.add_argument("--out-dir", default="morbit_out", help="directory for output files")
    v = sub.add_parser("validate", help="check a config without running it")
    common(v)
    d = sub.add_parser("describe", help="show the config schema and outputs of a kind")
    d.add_argument("kind", choices=sorted(KINDS))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "describe":
        print(f"{args.kind}: {KINDS[args.kind][1]}\n\n{COMMON}", end="")
        return EXIT_OK
    try:
        cfg = _load(args.config)
        if args.cmd == "validate":
            prepare(cfg, args.seed, args.exact, args.threads)
            print(f"ok: {cfg.get('kind')} config is valid")
            return EXIT_OK
        status = run(cfg, args.out_dir, args.seed, args.exact, args.threads)
    except CapExceededError as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except MorbitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if status == EXIT_CAP:
        print("search exhausted its caps; best-effort report written", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
