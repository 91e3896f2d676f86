"""Constancy verdicts of L1 against the Fourier-structure prediction."""
import argparse

from billiard_caustics.melnikov import classification_report
from billiard_caustics.tables import EllipseTable, FourierSeries, PerturbedCircleTable, PerturbedEllipseTable

H = FourierSeries.harmonic

ELLIPSE_CASES = {
    "const": FourierSeries(0.4),
    "cos": H(1),
    "cos2": H(2),
    "sin3": H(3, "sin"),
    "odd-mix": FourierSeries(1.0, (0.2, 0.0, 0.5), (0.0, 0.0, 0.0, 0.0, 1.0)),
    "cos+cos2": FourierSeries(cos=(1.0, 0.1)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a", type=float, default=2.0)
    ap.add_argument("--b", type=float, default=1.0)
    args = ap.parse_args()

    base = EllipseTable(args.a, args.b)
    disagreements = 0
    print("perturbed ellipse")
    for m, n in [(1, 3), (1, 4), (1, 5), (2, 5), (1, 6), (3, 7), (3, 8)]:
        for name, mu1 in ELLIPSE_CASES.items():
            rep = classification_report(PerturbedEllipseTable(base, 0.0, mu1), m, n)
            disagreements += not rep["agree"]
            print(f"  ({m},{n}) {name:>9}: {rep['verdict']:<12} amplitude {rep['amplitude']:.3e}"
                  f"{'' if rep['agree'] else '  DISAGREES'}")
    print("perturbed circle, r1 = cos(l theta)")
    for n in (3, 4, 5, 6):
        row = []
        for l in range(1, 3 * n + 1):
            rep = classification_report(PerturbedCircleTable(1.0, 0.0, H(l)), 1, n)
            disagreements += not rep["agree"]
            row.append("N" if rep["verdict"] == "Nonconstant" else ".")
        print(f"  n={n}: {''.join(row)}")
    print(f"disagreements: {disagreements}")


if __name__ == "__main__":
    main()
