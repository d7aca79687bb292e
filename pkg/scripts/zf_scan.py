"""Enumerate small-height points of a product system and list those with zero canonical height.

    python3 scripts/zf_scan.py systems/sq-cube.json --bounds 2 4 10 100
"""
import argparse
import math

from arithdyn.canonical import zf_search
from arithdyn.systems import load_spec


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("system")
    ap.add_argument("--bounds", type=float, nargs="+", default=[2, 10, 100],
                    help="H values; the height bound is ln H")
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--locus", choices=["joint", "ample"], default="joint")
    args = ap.parse_args(argv)

    f = load_spec(args.system).system
    for H in args.bounds:
        rep = zf_search(f, math.log(H), args.tol, locus=args.locus)
        print(f"H <= {H:g}: {rep.enumerated} enumerated, {len(rep.entries)} with hhat = 0, "
              f"{rep.violations} outside the predicted set")
    for e in rep.entries:
        print("  ", f.point_json(e.point))


if __name__ == "__main__":
    main()
