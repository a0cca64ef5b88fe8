"""Command-line front end.

Exit status: 0 when every check passes, 1 when a mathematical check fails
(the witness is printed and written), 2 for usage or input errors.

Randomized verbs (``an-sweep``, ``certify --random``, ``contraction-check
--random``) require ``--seed``. Random maps come from seeded rejection
sampling over affine and folded candidates ``alpha*x + beta`` /
``alpha*|x - c| + beta`` with ``|alpha| < 1`` plus small dyadic jitter; only
tables passing the exact pairwise weak-contraction check are kept.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from . import artifacts
from .assembly import build_f0_prefix, f0_measure_bound
from .construction import ConstructionPlan, build_balanced_system, validate_balanced
from .contraction import (
    admissible_pairs,
    an_sweep,
    analyze_child_intersections,
    bound_overlap_measure,
    check_weak_contraction,
    find_fixed_points,
    random_weak_contraction,
    representatives,
    sweep_maps,
)
from .errors import BalancedSetsError, CoverageError, NotWeakContraction
from .gauge import check_linear_minorant, derive_gauge, gauge_samples
from .measure import (
    canonical_cover,
    certify_lower_bound,
    cover_cost,
    enumerate_min_cover_cost,
    lebesgue_outer_measure,
    min_cover,
    random_cover,
    target_measure,
    verify_certificate,
)
from .numerics import ClosedInterval, format_rational as fr, hull, parse_rational

logger = logging.getLogger("balanced_sets")

VERBS = (
    "plan", "build", "validate", "gauge", "cover-cost", "certify", "min-cover",
    "lebesgue", "contraction-check", "an-sweep", "f0", "report",
)


class UsageError(Exception):
    pass


def _ints(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _index(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.replace(",", ".").split(".") if t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a multi-index like 1.2, got {text!r}")


def _label(target) -> str:
    return "K" if target is None else "K_{" + ".".join(map(str, target)) + "}"


# --------------------------------------------------------------------------
# shared loaders

def _plan(args) -> ConstructionPlan:
    if getattr(args, "plan", None):
        return artifacts.plan_from_json(artifacts.read(args.plan, "plan")["plan"])
    if not getattr(args, "branching", None):
        raise UsageError("give --branching or --plan")
    lo, hi = args.ambient
    return ConstructionPlan(args.branching, ClosedInterval(lo, hi), not args.relaxed)


def _system(args):
    if getattr(args, "system", None):
        return artifacts.system_from_json(artifacts.read(args.system, "system"))
    return build_balanced_system(_plan(args))


def _need_seed(args):
    if args.seed is None:
        raise UsageError(f"{args.verb} is randomized: --seed is required")
    return random.Random(args.seed)


def _emit(args, kind: str, body: dict):
    text = artifacts.write(args.out, kind, body)
    if args.out is None and not args.quiet:
        sys.stdout.write(text)


def _say(args, line: str):
    if not args.quiet:
        print(line, file=sys.stderr if args.out is None else sys.stdout)


# --------------------------------------------------------------------------
# verbs

def cmd_plan(args) -> int:
    plan = _plan(args)
    _emit(args, "plan", {"plan": artifacts.plan_to_json(plan)})
    _say(args, f"plan a={plan.branching} depth {plan.depth} {'strict' if plan.strict_growth else 'relaxed'}")
    return 0


def cmd_build(args) -> int:
    system = build_balanced_system(_plan(args))
    _emit(args, "system", artifacts.system_to_json(system))
    counts = "/".join(str(c) for c in system.counts[1:])
    _say(args, f"built depth {system.depth}: pieces per level {counts}; b = {[fr(b) for b in system.separations]}")
    return 0


def cmd_validate(args) -> int:
    system = _system(args)
    report = validate_balanced(system)
    body = {
        "branching": list(system.branching),
        "ok": report.ok,
        "checks": [
            {"name": c.name, "passed": c.passed, "required": c.required, "detail": c.detail,
             "witness": _plain(c.witness)}
            for c in report.checks
        ],
    }
    _emit(args, "validation", body)
    for c in report.checks:
        _say(args, f"  ({c.name}) {'pass' if c.passed else 'FAIL'}: {c.detail}")
    return 0 if report.ok else 1


def _plain(obj):
    """Witness payloads to JSON: tuples to lists, Fractions to strings."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, Fraction):
        return fr(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return str(obj)


def cmd_gauge(args) -> int:
    system = _system(args)
    h = derive_gauge(system)
    c = hull(canonical_cover(system, 1).elements).diameter
    minorant = check_linear_minorant(h, c)
    body = {
        "gauge": h.to_json(),
        "samples": artifacts.rational_pairs(gauge_samples(h, args.samples)),
        "minorant": {
            "c": fr(c),
            "passed": minorant.passed,
            "witness": None if minorant.witness is None else fr(minorant.witness),
            "checks": [[fr(x), fr(y), fr(g)] for x, y, g in minorant.checks],
            "note": minorant.note,
        },
    }
    _emit(args, "gauge", body)
    _say(args, f"gauge with {len(h.breakpoints)} breakpoints; minorant h(x) >= x/({fr(c)}): "
               f"{'pass' if minorant.passed else 'FAIL'}")
    return 0 if minorant.passed else 1


def _cover_arg(args, system):
    if args.cover:
        return artifacts.cover_from_json(artifacts.read(args.cover, "cover"))
    if args.random:
        rng = _need_seed(args)
        floor = 2 * system.b(args.min_diam_level)
        return random_cover(system, rng, floor, args.target)
    if args.level is None:
        raise UsageError("give --cover, --random, or --level")
    return canonical_cover(system, args.level, args.target)


def cmd_cover_cost(args) -> int:
    system = _system(args)
    h = derive_gauge(system)
    cover = _cover_arg(args, system)
    cost = cover_cost(cover, h)
    claimed = target_measure(system, cover.target)
    body = {"cover": artifacts.cover_to_json(cover), "cost": fr(cost), "claimed": fr(claimed)}
    _emit(args, "cover-cost", body)
    _say(args, f"cost of {len(cover.elements)} elements over {_label(cover.target)}: {fr(cost)} (measure {fr(claimed)})")
    return 0


def cmd_certify(args) -> int:
    if args.verify:
        cert = artifacts.certificate_from_json(artifacts.read(args.verify, "certificate"))
        problems = verify_certificate(cert)
        _emit(args, "certificate-check", {"source": str(args.verify), "passed": not problems, "failures": problems})
        _say(args, "certificate re-check: " + ("pass" if not problems else "FAIL: " + "; ".join(problems)))
        return 0 if not problems else 1

    system = _system(args)
    h = derive_gauge(system)
    cover = _cover_arg(args, system)
    try:
        cert = certify_lower_bound(system, h, cover)
    except CoverageError as exc:
        witness = [list(i) for i in exc.missed]
        _emit(args, "certificate", {"verdict": "fail", "reason": "coverage", "missed": witness})
        _say(args, f"FAIL: cover misses {len(witness)} piece(s), first {'.'.join(map(str, exc.missed[0]))}")
        return 1
    _emit(args, "certificate", artifacts.certificate_to_json(cert))
    _say(args, f"certificate m={cert.m}: sum s_j={cert.total} >= {cert.required}; "
               f"cost {fr(cert.cost)} >= {fr(cert.bound)} >= {fr(cert.claimed)}: {'pass' if cert.passed else 'FAIL'}")
    return 0 if cert.passed else 1


def cmd_min_cover(args) -> int:
    system = _system(args)
    h = derive_gauge(system)
    m = args.level
    res = min_cover(system, h, m, args.target)
    upper = cover_cost(canonical_cover(system, m, args.target), h)
    claimed = target_measure(system, args.target)
    body = {
        "level": m,
        "target": None if args.target is None else list(args.target),
        "pieces": len(res.pieces),
        "oracle": fr(res.cost),
        "upper": fr(upper),
        "claimed": fr(claimed),
        "runs": [[i, j] for i, j in res.runs],
        "warnings": res.warnings,
    }
    if args.enumerate:
        enum = enumerate_min_cover_cost(system, h, m, args.target)
        body["enumeration"] = {"cost": fr(enum.cost), "nodes": enum.nodes}
    ok = res.cost == upper == claimed and (not args.enumerate or body["enumeration"]["cost"] == body["oracle"])
    body["agree"] = ok
    _emit(args, "min-cover", body)
    _say(args, f"{_label(args.target)} at level {m}: dp {fr(res.cost)}, canonical {fr(upper)}, claimed {fr(claimed)}")
    return 0 if ok else 1


def cmd_lebesgue(args) -> int:
    system = _system(args)
    values = [lebesgue_outer_measure(system, n) for n in range(1, system.depth + 1)]
    halving = [values[n + 1] * 2 <= values[n] for n in range(len(values) - 1)]
    body = {"levels": [[n + 1, fr(v)] for n, v in enumerate(values)], "halving": halving}
    _emit(args, "lebesgue", body)
    for n, v in enumerate(values, start=1):
        _say(args, f"  lambda(level {n}) = {fr(v)}")
    return 0 if all(halving) else 1


def cmd_contraction_check(args) -> int:
    system = _system(args) if (args.system or args.branching or args.plan) else None
    if args.map:
        fmap = artifacts.map_from_json(artifacts.read(args.map, "map"))
    elif args.random:
        if system is None:
            raise UsageError("--random needs a system to sample on")
        fmap = random_weak_contraction(_need_seed(args), representatives(system))
    else:
        raise UsageError("give --map or --random")
    if args.map_out:
        artifacts.write(args.map_out, "map", fmap.to_json())

    rep = check_weak_contraction(fmap)
    body = {
        "points": len(fmap),
        "weak_contraction": rep.passed,
        "pair": None if rep.pair is None else [fr(rep.pair[0]), fr(rep.pair[1])],
        "fixed_points": [fr(x) for x in find_fixed_points(fmap, strict=False)],
        "intersections": [],
    }
    status = 0 if rep.passed else 1
    if rep.passed and system is not None:
        for target, m in admissible_pairs(system):
            ir = analyze_child_intersections(system, fmap, target, m)
            entry = {"target": list(target), "m": m, "max_count": ir.max_count,
                     "refutations": [list(e) for e in ir.refutations]}
            if ir.max_count <= 1:
                entry["bound"] = fr(bound_overlap_measure(system, ir))
            else:
                status = 1
            body["intersections"].append(entry)
    _emit(args, "contraction", body)
    _say(args, f"weak contraction: {'pass' if rep.passed else 'FAIL at ' + str(body['pair'])}")
    return status


def cmd_an_sweep(args) -> int:
    system = _system(args)
    rng = _need_seed(args)
    maps = sweep_maps(system, rng, args.maps)
    rows = an_sweep(system, maps)
    body = {
        "seed": args.seed,
        "maps": args.maps,
        "branching": list(system.branching),
        "rows": [
            {
                "n": r.n,
                "per_target": fr(r.per_target),
                "aggregate": fr(r.aggregate),
                "inverse_n": fr(r.inverse_n),
                "max_count": r.max_count,
                "certified": [[list(t), m, fr(b)] for t, m, b in r.certified],
                "ok": r.ok,
            }
            for r in rows
        ],
    }
    _emit(args, "an-sweep", body)
    for r in rows:
        hits = f"max child hits {r.max_count}" if r.certified else "no admissible pairs at this depth"
        _say(args, f"  n={r.n}: A_n <= {fr(r.aggregate)} (1/n = {fr(r.inverse_n)}), {hits}")
    return 0 if all(r.ok for r in rows) else 1


def cmd_f0(args) -> int:
    system = _system(args)
    family = build_f0_prefix(system, args.count)
    res = f0_measure_bound(family, derive_gauge(system))
    body = {
        "family": family.to_json(),
        "series": fr(res.series),
        "recomputed": fr(res.recomputed),
        "per_entry": [fr(v) for v in res.per_entry],
        "agree": res.agrees,
        "dyadic_bound": fr(1 - Fraction(1, 2 ** args.count)),
    }
    _emit(args, "f0", body)
    _say(args, f"F0 prefix of {args.count}: series {fr(res.series)}, recomputed {fr(res.recomputed)}")
    ok = res.agrees and (not system.plan.strict_growth or res.series <= 1 - Fraction(1, 2 ** args.count))
    return 0 if ok else 1


# --------------------------------------------------------------------------
# report

def render_report(docs: Sequence[dict], plot_points: Optional[int] = None):
    """Human-readable summary of artifacts; returns ``(text, plot_rows, ok)``."""
    lines: List[str] = []
    plot_rows = []
    ok = True
    for doc in docs:
        kind = artifacts.kind_of(doc)
        if kind == "system":
            a = tuple(doc["plan"]["branching"])
            lines.append(f"system a={a}: {len(doc['pieces'])} pieces, b = {', '.join(doc['separations'])}")
        elif kind == "validation":
            ok &= doc["ok"]
            lines.append(f"validation: {'PASS' if doc['ok'] else 'FAIL'}")
            for c in doc["checks"]:
                mark = "pass" if c["passed"] else "FAIL"
                lines.append(f"  ({c['name']}) {mark}: {c['detail']}")
                if not c["passed"] and c["witness"]:
                    lines.append(f"     witness: {c['witness']}")
        elif kind == "min-cover":
            label = _label(doc["target"])
            if doc["upper"] == doc["oracle"]:
                lines.append(f"H^h({label}) upper = lower = {doc['oracle']}")
            else:
                ok = False
                lines.append(f"H^h({label}) MISMATCH: upper {doc['upper']} vs oracle {doc['oracle']}")
            if "enumeration" in doc:
                lines.append(f"  enumeration over run partitions: {doc['enumeration']['cost']} "
                             f"({doc['enumeration']['nodes']} nodes)")
        elif kind == "certificate":
            passed = doc.get("verdict") == "pass"
            ok &= passed
            if doc.get("reason") == "coverage":
                lines.append(f"certificate: FAIL, cover misses {len(doc['missed'])} piece(s)")
            else:
                lines.append(f"certificate for {_label(doc['target'])} at m={doc['m']}: "
                             f"{'PASS' if passed else 'FAIL'} (cost {doc['cost']} >= {doc['bound']} >= {doc['claimed']})")
        elif kind == "certificate-check":
            ok &= doc["passed"]
            lines.append(f"certificate re-check: {'PASS' if doc['passed'] else 'FAIL'}")
        elif kind == "cover-cost":
            lines.append(f"cover cost over {_label(doc['cover']['target'])}: {doc['cost']}")
        elif kind == "lebesgue":
            ok &= all(doc["halving"])
            vals = ", ".join(v for _, v in doc["levels"])
            lines.append(f"lebesgue outer measure by level: {vals}; halving {'holds' if all(doc['halving']) else 'FAILS'}")
        elif kind == "gauge":
            ok &= doc["minorant"]["passed"]
            lines.append(f"gauge: {len(doc['gauge']['breakpoints'])} breakpoints, "
                         f"minorant x/({doc['minorant']['c']}) {'holds' if doc['minorant']['passed'] else 'FAILS'}")
            samples = doc["samples"]
            if plot_points is not None:
                step = max(1, len(samples) // plot_points) if plot_points else 1
                samples = samples[::step][:plot_points]
            plot_rows.extend(samples)
        elif kind == "an-sweep":
            lines.append(f"A_n sweep over {doc['maps']} maps (seed {doc['seed']}):")
            for r in doc["rows"]:
                hits = f"max child hits {r['max_count']}" if r["certified"] else "no admissible pairs at this depth"
                lines.append(f"  n={r['n']}: A_n bound {r['aggregate']} <= 1/n = {r['inverse_n']}; {hits}")
                if r["max_count"] >= 2:
                    ok = False
                    lines.append(f"  !!! REFUTATION WITNESS at n={r['n']}: an image met {r['max_count']} children")
                ok &= r["ok"]
        elif kind == "contraction":
            ok &= doc["weak_contraction"]
            lines.append(f"map with {doc['points']} samples: weak contraction "
                         f"{'yes' if doc['weak_contraction'] else 'NO, pair ' + str(doc['pair'])}; "
                         f"fixed points {doc['fixed_points']}")
            for e in doc["intersections"]:
                if e["refutations"]:
                    ok = False
                    lines.append(f"  !!! REFUTATION WITNESS for target {e['target']}: {e['refutations'][:3]}")
        elif kind == "f0":
            ok &= doc["agree"]
            lines.append(f"F0 prefix: series {doc['series']}, recomputed {doc['recomputed']}, "
                         f"{'agree' if doc['agree'] else 'DISAGREE'}; dyadic bound {doc['dyadic_bound']}")
        elif kind == "plan":
            lines.append(f"plan a={tuple(doc['plan']['branching'])}")
        else:
            lines.append(f"({kind} artifact)")
    lines.append("overall: " + ("PASS" if ok else "FAIL"))
    return "\n".join(lines) + "\n", plot_rows, ok


def cmd_report(args) -> int:
    docs = [artifacts.read(p) for p in args.inputs]
    text, rows, ok = render_report(docs, args.plot_points)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    if not args.quiet:
        sys.stdout.write(text)
    if args.plot_data:
        Path(args.plot_data).write_text("".join(f"{x}\t{y}\n" for x, y in rows), encoding="utf-8")
    return 0 if ok else 1


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="balanced-sets", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True, metavar="VERB")

    def add(name, func, help_, system=True):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("-o", "--out", help="artifact path (stdout when omitted)")
        sp.add_argument("-q", "--quiet", action="store_true")
        if system:
            src = sp.add_argument_group("system source")
            src.add_argument("--system", help="system artifact from `build`")
            src.add_argument("--plan", help="plan artifact from `plan`")
            src.add_argument("--branching", type=_ints, help="e.g. 2,2,8,96")
            src.add_argument("--relaxed", action="store_true", help="only require a_n >= 2")
            src.add_argument("--ambient", type=lambda s: tuple(parse_rational(t) for t in s.split(",")),
                             default=(Fraction(0), Fraction(1)), help="lo,hi (default 0,1)")
        sp.add_argument("--seed", type=int)
        return sp

    add("plan", cmd_plan, "check a branching sequence and write a plan")
    add("build", cmd_build, "construct a balanced system")
    add("validate", cmd_validate, "independently re-check properties (i)-(v)")
    sp = add("gauge", cmd_gauge, "derive the gauge, sample it, check the linear minorant")
    sp.add_argument("--samples", type=int, default=64)
    for name, func, help_ in (("cover-cost", cmd_cover_cost, "gauge cost of a cover"),
                              ("certify", cmd_certify, "counting lower-bound certificate for a cover")):
        sp = add(name, func, help_)
        sp.add_argument("--cover", help="cover artifact")
        sp.add_argument("--level", type=int, help="use the canonical level-n cover")
        sp.add_argument("--target", type=_index, help="restrict to a piece, e.g. 1 or 1.2")
        sp.add_argument("--random", action="store_true", help="random valid cover (needs --seed)")
        sp.add_argument("--min-diam-level", type=int, default=3,
                        help="random covers keep every element at least 2*b_k wide (default k=3)")
        if name == "certify":
            sp.add_argument("--verify", help="re-check a certificate artifact on its own")
    sp = add("min-cover", cmd_min_cover, "minimal run-cover cost by dynamic programming")
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--target", type=_index)
    sp.add_argument("--enumerate", action="store_true", help="cross-check by branch-and-bound enumeration")
    add("lebesgue", cmd_lebesgue, "Lebesgue measure of each level's union")
    sp = add("contraction-check", cmd_contraction_check, "check a sampled map and its child intersections")
    sp.add_argument("--map", help="map artifact")
    sp.add_argument("--random", action="store_true", help="random weak contraction (needs --seed)")
    sp.add_argument("--map-out", help="also write the map used")
    sp = add("an-sweep", cmd_an_sweep, "A_n overlap bounds for n = 1..N-1 over random maps")
    sp.add_argument("--maps", type=int, default=100)
    sp = add("f0", cmd_f0, "prefix of the translated union and its measure series")
    sp.add_argument("--count", type=int, required=True)
    sp = add("report", cmd_report, "summarize artifacts", system=False)
    sp.add_argument("inputs", nargs="+", help="artifact files")
    sp.add_argument("--plot-data", help="write gauge samples as x<TAB>h(x)")
    sp.add_argument("--plot-points", type=int, help="thin gauge samples to this many rows")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, BalancedSetsError, ValueError) as exc:
        if isinstance(exc, NotWeakContraction):
            print(f"check failed: {exc}", file=sys.stderr)
            return 1
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
