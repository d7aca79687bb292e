"""Watch the arithmetic-degree estimators approach phi on a Fibonacci monomial orbit.

Prints one row per iterate: exact height, closed-form height, ratio and root
estimates, and the stored bit size.

    python3 scripts/fibonacci_convergence.py --iters 30 --point 2 3
"""
import argparse
import math
from fractions import Fraction

from arithdyn.degrees import dynamical_degree
from arithdyn.exact import normalize, weil_height
from arithdyn.maps import MonomialMap, iterate_orbit


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iters", type=int, default=25)
    ap.add_argument("--point", nargs=2, default=["2", "3"])
    ap.add_argument("--bit-budget", type=int, default=10**7)
    args = ap.parse_args(argv)

    f = MonomialMap([[1, 1], [1, 0]])
    trace = iterate_orbit(f, f.parse_point(args.point), args.iters, args.bit_budget)
    a, b = (Fraction(v) for v in args.point)
    h_a, h_b = weil_height(normalize((1, a))), weil_height(normalize((1, b)))
    F = [0, 1]
    while len(F) < args.iters + 3:
        F.append(F[-1] + F[-2])

    print(f"{'n':>3} {'h(1:x_n)':>14} {'closed form':>14} {'ratio':>12} {'root':>10} {'bits':>9}")
    prev = None
    for n, (x, bits) in enumerate(zip(trace.points, trace.bit_sizes)):
        h = weil_height(normalize((1, x.coords[0])))
        closed = F[n + 1] * h_a + F[n] * h_b
        H = max(1.0, trace.heights[n])
        ratio = "" if prev is None else f"{H / prev:.10f}"
        root = "" if n == 0 else f"{H ** (1 / n):.6f}"
        print(f"{n:>3} {h:>14.6f} {closed:>14.6f} {ratio:>12} {root:>10} {bits:>9}")
        prev = H
    rep = dynamical_degree(f)
    print(f"delta in [{rep.delta_lower:.12f}, {rep.delta_upper:.12f}], phi = {(1 + math.sqrt(5)) / 2:.12f}")
    if trace.truncated:
        print("orbit truncated by the bit budget")


if __name__ == "__main__":
    main()
