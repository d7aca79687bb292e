"""Command line entry point: ``arithdyn <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from . import __version__
from .canonical import (EigenDivisorHeight, ample_canonical_height, canonical_height,
                        eigen_structure, zf_search)
from .degrees import arithmetic_degree, dynamical_degree
from .errors import ArithDynError
from .harness import run_campaign, summary_rows, write_csv
from .maps import iterate_orbit
from .systems import load_spec, parse_point


def _budget_args(p):
    p.add_argument("--max-iters", type=int)
    p.add_argument("--bit-budget", type=int)
    p.add_argument("--precision", type=float)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--window", type=int)
    p.add_argument("--seed", type=int, default=0)


def _overrides(args) -> dict:
    return {k: getattr(args, k, None) for k in ("max_iters", "bit_budget", "precision",
                                                "tolerance", "window")}


def _load(args):
    spec = load_spec(args.spec)
    spec.budgets = spec.budgets.with_env().updated(_overrides(args))
    return spec


def _point(spec, args):
    if args.point:
        return parse_point(spec.system, json.loads(args.point))
    if not spec.points:
        raise ArithDynError("no --point given and the spec file lists no points")
    return spec.points[0].state


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def cmd_delta(args) -> int:
    spec = _load(args)
    _emit(dynamical_degree(spec.system, spec.budgets.precision).to_json())
    return 0


def cmd_alpha(args) -> int:
    spec = _load(args)
    b = spec.budgets
    x = _point(spec, args)
    trace = iterate_orbit(spec.system, x, b.max_iters, b.bit_budget)
    est = arithmetic_degree(trace, b.tolerance, b.window)
    _emit({"point": spec.system.point_json(x), "iterates": trace.iterates,
           "truncated": trace.truncated, "heights": [repr(h) for h in trace.heights],
           "alpha": est.to_json()})
    return 0


def cmd_canht(args) -> int:
    spec = _load(args)
    f = spec.system
    x = _point(spec, args)
    s = eigen_structure(f)
    out = {"point": f.point_json(x), "period": s.period, "components": {}}
    for c, E in zip(s.components, s.divisor_heights()):
        if c.lam < 2:
            continue
        est = canonical_height(E, x, target=args.target, max_iters=args.max_iters or 64,
                               bit_budget=spec.budgets.bit_budget)
        out["components"][c.label] = {"lambda": c.lam, **est.to_json()}
    ah = ample_canonical_height(f, x, args.target, structure=s,
                                max_iters=args.max_iters or 64, bit_budget=spec.budgets.bit_budget)
    out["ample"] = {"value": repr(ah.value), "error_bar": repr(ah.error_bar),
                    "budget_exceeded": ah.budget_exceeded}
    _emit(out)
    return 0


def cmd_zf(args) -> int:
    spec = _load(args)
    rep = zf_search(spec.system, args.bound, args.tol, locus=args.locus)
    data = rep.to_json(spec.system)
    _emit(data)
    if args.csv:
        rows = [["point", "hhat", "error_bar", "predicted_member"]]
        rows += [[json.dumps(p["point"]), p["hhat"], p["error_bar"], str(p["predicted_member"])]
                 for p in data["points"]]
        write_csv(rows, args.csv)
    return 1 if rep.violations else 0


def cmd_toric_info(args) -> int:
    from .toric import (Fan, ToricEndo, class_lattice, induced_base_map, nef_cone,
                        pullback_matrix, ray_fixing_iterate, semiample_fibration)

    with open(args.fan, encoding="utf-8") as fh:
        data = json.load(fh)
    fan = Fan.from_json(data.get("fan", data))
    lat = class_lattice(fan)
    nef = nef_cone(fan)
    out = {"rank": fan.rank, "rays": [list(r) for r in fan.rays],
           "class_rank": lat.rank, "class_basis_rays": list(lat.basis_rays),
           "ray_classes": [[str(v) for v in lat.to_class(
               [int(i == j) for j in range(len(fan.rays))])] for i in range(len(fan.rays))],
           "nef_extremal_classes": [list(v) for v in nef.class_vectors],
           "fibrations": []}
    for D in nef.extremal_classes:
        fib = semiample_fibration(fan, D)
        out["fibrations"].append({"divisor": [str(a) for a in D.coefficients], "dim_Y": fib.dim,
                                  "lattice_points": [list(m) for m in fib.lattice_points]})
    phi = args.phi and json.loads(args.phi) or data.get("phi")
    if phi:
        endo = ToricEndo(fan, phi)
        M = pullback_matrix(fan, endo)
        fix = ray_fixing_iterate(nef, M)
        fN = endo.power(fix.n)
        out["pullback"] = [[str(v) for v in row] for row in M]
        out["ray_fixing"] = {"n": fix.n, "permutation": list(fix.permutation),
                             "lambdas": list(fix.lambdas)}
        out["base_maps"] = []
        for D, lam in zip(nef.extremal_classes, fix.lambdas):
            g = induced_base_map(fan, fN, semiample_fibration(fan, D), lam, seed=args.seed)
            out["base_maps"].append(None if g is None else [list(r) for r in g.A])
    _emit(out)
    return 0


def cmd_verify(args) -> int:
    return run_campaign(args.spec, args.out, args.csv, _overrides(args), jobs=args.jobs)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="arithdyn", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("delta", help="dynamical degree enclosure")
    p.add_argument("spec")
    _budget_args(p)
    p.set_defaults(func=cmd_delta)

    p = sub.add_parser("alpha", help="orbit and arithmetic degree estimate")
    p.add_argument("spec")
    p.add_argument("--point", help='JSON array, e.g. \'["2","1"]\'')
    _budget_args(p)
    p.set_defaults(func=cmd_alpha)

    p = sub.add_parser("canht", help="canonical heights of the eigendivisors")
    p.add_argument("spec")
    p.add_argument("--point")
    p.add_argument("--target", type=float, default=1e-9)
    _budget_args(p)
    p.set_defaults(func=cmd_canht)

    p = sub.add_parser("zf", help="vanishing locus of the canonical heights")
    p.add_argument("spec")
    p.add_argument("--bound", type=float, default=math.log(100))
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--locus", choices=("joint", "ample"), default="joint")
    p.add_argument("--csv")
    _budget_args(p)
    p.set_defaults(func=cmd_zf)

    p = sub.add_parser("toric-info", help="class group, nef cone and fibrations of a fan")
    p.add_argument("fan")
    p.add_argument("--phi", help="lattice map as JSON matrix")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_toric_info)

    p = sub.add_parser("verify", help="full campaign over a spec file or directory")
    p.add_argument("spec")
    p.add_argument("-o", "--out")
    p.add_argument("--csv")
    p.add_argument("--jobs", type=int, default=1)
    _budget_args(p)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ArithDynError, OSError, ValueError) as exc:
        # ValueError covers malformed JSON in spec files and --point
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
