"""Resonant caustics of one ellipse: lambda, k', residual and profile resolution."""
import argparse
import math

from billiard_caustics.caustics import poncelet_polygon, resonant_lambda
from billiard_caustics.errors import ConvergenceError
from billiard_caustics.melnikov import resolved_profile
from billiard_caustics.tables import EllipseTable, FourierSeries, PerturbedEllipseTable


def coprime_pairs(n_max):
    for n in range(3, n_max + 1):
        for m in range(1, (n + 1) // 2):
            if 2 * m < n and math.gcd(m, n) == 1:
                yield m, n


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=2.0)
    ap.add_argument("--b", type=float, default=1.0)
    ap.add_argument("--n-max", type=int, default=9)
    args = ap.parse_args()

    family = PerturbedEllipseTable(EllipseTable(args.a, args.b), 0.0, FourierSeries.harmonic(1))
    print(f"{'m':>3} {'n':>3} {'lambda':>20} {'kc':>10} {'|nd-4Km|':>10} {'closure':>10} {'L1 grid':>8}")
    for m, n in coprime_pairs(args.n_max):
        try:
            p = resonant_lambda(args.a, args.b, m, n)
        except ConvergenceError:
            print(f"{m:>3} {n:>3}  beyond the modulus cap")
            continue
        closure = max(poncelet_polygon(p, 0.1 * j).closure_error() for j in range(16))
        try:
            grid = str(resolved_profile(family, m, n).grid.size)
        except ConvergenceError:
            grid = ">65536"
        print(f"{m:>3} {n:>3} {p.lam:>20.15f} {p.kc:>10.3e} {p.resonance_residual:>10.2e} {closure:>10.2e} {grid:>8}")


if __name__ == "__main__":
    main()
