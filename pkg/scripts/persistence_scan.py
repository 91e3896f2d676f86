"""Finite-eps two-graph separation against eps * L1' for several resonances."""
import argparse
import json
import pathlib

from billiard_caustics.cli import dumps
from billiard_caustics.errors import ConvergenceError
from billiard_caustics.persistence import default_grid, melnikov_consistency
from billiard_caustics.tables import EllipseTable, FourierSeries, PerturbedCircleTable, PerturbedEllipseTable

H = FourierSeries.harmonic


def cases():
    e21 = EllipseTable(2.0, 1.0)
    yield "ellipse-cos", PerturbedEllipseTable(e21, 0.0, H(1)), [(1, 3), (1, 4), (1, 5)]
    yield "ellipse-cos2", PerturbedEllipseTable(e21, 0.0, H(2)), [(1, 3), (1, 4)]
    yield "circle-cos2", PerturbedCircleTable(1.0, 0.0, H(2)), [(1, 3)]
    yield "circle-cos3", PerturbedCircleTable(1.0, 0.0, H(3)), [(1, 3)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=64)
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-3, 5e-4, 2.5e-4])
    ap.add_argument("--out", type=pathlib.Path, help="directory for per-case JSON and CSV")
    args = ap.parse_args()

    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
    for name, family, resonances in cases():
        for m, n in resonances:
            try:
                rep = melnikov_consistency(family, m, n, args.eps, default_grid(args.grid))
            except ConvergenceError as exc:
                print(f"{name} ({m},{n}): failed: {exc}")
                continue
            errs = " ".join(f"{e:.3e}" for e in rep.sup_err_per_eps)
            print(f"{name} ({m},{n}): {rep.verdict:<12} p={rep.fitted_order:.3f} sup err {errs}")
            if args.out:
                stem = args.out / f"{name}_{m}_{n}"
                stem.with_suffix(".json").write_text(dumps(rep.to_dict()))
                with open(stem.with_suffix(".csv"), "w", newline="\n") as fh:
                    rep.write_samples_csv(fh)


if __name__ == "__main__":
    main()
