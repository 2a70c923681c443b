"""Command-line front end: ``metriclab <subcommand> ...``.

Exit codes: 0 success, 1 a fail verdict, 2 usage errors (bad flags, unknown
families, bad parameters or points), 3 runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from .core import as_point
from .errors import BadParams, CarrierViolation, MetricLabError, UnknownFamily
from .intrinsic import EstimatorConfig, estimate_intrinsic, verify_theorem_instance
from .paths import length_profile, path_length, straight_path
from .scenarios import SCENARIOS, run_scenario
from .similarity import (
    COMPOSITION_DEFAULTS,
    composition_check,
    composition_function,
    dilatation_profile,
    local_ratio_profile,
    similarity_verdict,
)
from .spaces import make_space, parse_number

OK, FAIL, USAGE, RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.9g}"
    return str(v)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o))


def _emit_json(obj) -> None:
    # json writes inf as Infinity, which is what Python's json reader accepts back
    print(json.dumps(obj, indent=2, default=_json_default))


def parse_point(text: str, dim: int) -> np.ndarray:
    """``"0.5"``, ``"0.5,2"`` or a complex literal such as ``"1+2j"``."""
    t = text.strip()
    try:
        if "j" in t and "," not in t:
            return as_point(complex(t.replace(" ", "")), dim)
        parts = [parse_number(p) for p in t.split(",")]
    except (ValueError, BadParams) as exc:
        raise UsageError(f"cannot parse point {text!r}") from exc
    try:
        return as_point(parts, dim)
    except CarrierViolation as exc:
        raise UsageError(str(exc)) from exc


def read_pairs(path: str, dim: int) -> list:
    """Pairs CSV with header x1,x2,y1,y2; the second coordinates are blank for 1D."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    pairs = []
    for i, row in enumerate(rows, start=2):
        try:
            x = [float(row["x1"])] + ([float(row["x2"])] if dim == 2 else [])
            y = [float(row["y1"])] + ([float(row["y2"])] if dim == 2 else [])
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"{path}:{i}: expected columns x1,x2,y1,y2") from exc
        pairs.append((np.array(x), np.array(y)))
    return pairs


def _config(args) -> EstimatorConfig:
    return EstimatorConfig(
        segments=args.segments,
        relax_rounds=args.relax_rounds,
        length_tol=args.tol,
        seed=args.seed,
        max_depth=args.max_depth,
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_eval(args) -> int:
    sp = make_space(args.space)
    x, y = parse_point(args.x, sp.dim), parse_point(args.y, sp.dim)
    d = sp.distance(x, y)
    if args.json:
        _emit_json({"space": sp.name, "x": x, "y": y, "value": d})
    else:
        print(fmt(d))
    return OK


def cmd_length_profile(args) -> int:
    sp = make_space(args.space)
    path = straight_path(sp, parse_point(args.from_, sp.dim), parse_point(args.to, sp.dim))
    prof = length_profile(path, args.max_depth)
    res = path_length(path, tol=args.tol, max_depth=args.max_depth, divergence_ratio=args.divergence_ratio, cap=args.cap)
    if args.json:
        _emit_json({"profile": [{"knots": n, "segments": n - 1, "S": s} for n, s in prof], "length": res.to_dict()})
        return OK
    print("segments,S")
    for n, s in prof:
        print(f"{n - 1},{fmt(s)}")
    print(f"# status {res.status} value {fmt(res.value)}")
    return OK


def cmd_intrinsic(args) -> int:
    sp = make_space(args.space)
    est = estimate_intrinsic(sp, parse_point(args.x, sp.dim), parse_point(args.y, sp.dim), _config(args))
    if args.json:
        _emit_json(est.to_dict())
    else:
        print(f"value {fmt(est.upper_bound)}")
        print(f"status {est.status}")
        print(f"iterations {est.iterations}")
    return OK


def cmd_compare(args) -> int:
    s1, s2 = make_space(args.space1), make_space(args.space2)
    rep = verify_theorem_instance(s1, s2, read_pairs(args.pairs, s1.dim), _config(args), args.gap_tol)
    if args.json:
        _emit_json(rep.to_dict())
    else:
        sys.stdout.write(rep.to_csv())
    return OK if rep.passed else FAIL


_RELATION_MODES = {"local": "point_vs_anchor", "strong": "pair_in_ball", "infinitesimal": "defect"}


def cmd_similarity(args) -> int:
    s1, s2 = make_space(args.space1), make_space(args.space2)
    a = parse_point(args.anchor, s1.dim)
    if args.relation == "dilatation":
        prof = dilatation_profile(s1, s2, a, args.r0, args.levels, args.pairs_per_level, args.seed, args.directions)
        vals = [v for _, v in prof if not math.isnan(v)]
        if len(vals) < 3:
            raise MetricLabError("fewer than 3 nonempty radii")
        if args.json:
            _emit_json({"relation": "dilatation", "profile": prof, "estimate": vals[-1]})
        else:
            print("radius,sup_ratio")
            for r, v in prof:
                print(f"{fmt(r)},{fmt(v)}")
            print(f"# dilatation {fmt(vals[-1])}")
        return OK
    relations = list(_RELATION_MODES) if args.relation == "all" else [args.relation]
    results = []
    for rel in relations:
        prof = local_ratio_profile(s1, s2, a, args.r0, args.levels, args.directions, _RELATION_MODES[rel])
        results.append((rel, prof, similarity_verdict(prof, args.verdict_tol)))
    if args.json:
        out = [{**v.to_dict(), "profile": p.to_dict()} for _, p, v in results]
        _emit_json(out[0] if len(out) == 1 else out)
    else:
        for rel, prof, v in results:
            if len(results) == 1:
                print("radius,min_ratio,max_ratio,samples")
                for r in prof.records:
                    print(f"{fmt(r.radius)},{fmt(r.min_ratio)},{fmt(r.max_ratio)},{r.sample_count}")
            print(f"{v.relation:<26} {v.outcome:<13} liminf {fmt(v.liminf_estimate)}  limsup {fmt(v.limsup_estimate)}")
    return FAIL if any(v.outcome == "fails" for _, _, v in results) else OK


def _parse_params(text: str) -> dict:
    out = {}
    for item in filter(None, (s.strip() for s in (text or "").split(","))):
        if "=" not in item:
            raise UsageError(f"expected key=value, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        out[k] = parse_number(v)
    return out


def cmd_composition(args) -> int:
    f = composition_function(args.f, **_parse_params(args.params))
    rep = composition_check(f, args.grid_max, args.grid_size, args.check_tol)
    if args.json:
        _emit_json(rep.to_dict())
    else:
        for key in ("f0_zero", "Q_estimate", "lower_bound_C", "monotone", "concave", "verdict"):
            print(f"{key} {fmt(getattr(rep, key))}")
    return OK if rep.verdict == "holds" else FAIL


def cmd_reproduce(args) -> int:
    if args.list or not args.example:
        for k, (desc, _) in SCENARIOS.items():
            print(f"{k:<28} {desc}")
        return OK
    if args.example not in SCENARIOS:
        raise UsageError(f"unknown example {args.example!r}; see --list")
    res = run_scenario(args.example, EstimatorConfig(seed=args.seed))
    if args.json:
        _emit_json({"id": res.id, "passed": res.passed, "lines": res.lines, "data": res.data})
    else:
        for line in res.lines:
            print(line)
        print(f"{res.id}: {'pass' if res.passed else 'fail'}")
    return OK if res.passed else FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON instead of text")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")

    est = argparse.ArgumentParser(add_help=False)
    est.add_argument("--segments", type=int, default=32)
    est.add_argument("--relax-rounds", type=int, default=200)
    est.add_argument("--tol", type=float, default=1e-7, help="path-length convergence tolerance")
    est.add_argument("--max-depth", type=int, default=20)

    p = argparse.ArgumentParser(prog="metriclab", description="Intrinsic distances, similarity diagnostics and kernel distances.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("eval", parents=[common], help="evaluate d(x, y)")
    s.add_argument("--space", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("length-profile", parents=[common], help="polygonal sums along dyadic refinements")
    s.add_argument("--space", required=True)
    s.add_argument("--from", dest="from_", required=True)
    s.add_argument("--to", required=True)
    s.add_argument("--max-depth", type=int, default=10)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--divergence-ratio", type=float, default=1.3)
    s.add_argument("--cap", type=float, default=1e6)
    s.set_defaults(func=cmd_length_profile)

    s = sub.add_parser("intrinsic", parents=[common, est], help="estimate the intrinsic distance")
    s.add_argument("--space", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.set_defaults(func=cmd_intrinsic)

    s = sub.add_parser("compare", parents=[common, est], help="compare intrinsic distances of two spaces on a pairs file")
    s.add_argument("--space1", required=True)
    s.add_argument("--space2", required=True)
    s.add_argument("--pairs", required=True, help="CSV with header x1,x2,y1,y2")
    s.add_argument("--gap-tol", type=float, default=1e-2, help="relative gap for pass (default 1e-2)")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("similarity", parents=[common], help="ratio profile and verdict at an anchor")
    s.add_argument("--space1", required=True)
    s.add_argument("--space2", required=True)
    s.add_argument("--anchor", required=True)
    s.add_argument("--relation", choices=["local", "strong", "infinitesimal", "dilatation", "all"], default="local")
    s.add_argument("--r0", type=float, default=0.1)
    s.add_argument("--levels", type=int, default=12)
    s.add_argument("--directions", type=int, default=16)
    s.add_argument("--pairs-per-level", type=int, default=64)
    s.add_argument("--verdict-tol", type=float, default=5e-3)
    s.set_defaults(func=cmd_similarity)

    s = sub.add_parser("composition", parents=[common], help="check the composition criterion for a named f")
    s.add_argument("--f", required=True, choices=sorted(COMPOSITION_DEFAULTS))
    s.add_argument("--params", default="", help="comma-separated key=value, e.g. sigma=2")
    s.add_argument("--grid-max", type=float, default=4.0)
    s.add_argument("--grid-size", type=int, default=400)
    s.add_argument("--check-tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_composition)

    s = sub.add_parser("reproduce", parents=[common], help="run a canned example scenario")
    s.add_argument("--example")
    s.add_argument("--list", action="store_true")
    s.set_defaults(func=cmd_reproduce)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else USAGE
    try:
        return args.func(args)
    except (UsageError, UnknownFamily, BadParams, CarrierViolation) as exc:
        print(f"metriclab: error: {exc}", file=sys.stderr)
        return USAGE
    except OSError as exc:
        print(f"metriclab: error: {exc}", file=sys.stderr)
        return USAGE
    except (MetricLabError, ValueError, ArithmeticError) as exc:
        print(f"metriclab: runtime error: {exc}", file=sys.stderr)
        return RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
