"""Command-line front end.

Exit status: 0 on success, 1 when a numerical solve fails, 2 on bad input.
Errors are reported on stderr as one JSON object. Floats are written with 17
significant digits and in a fixed order, so equal configurations give
byte-identical output.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .billiard_map import PhasePoint, step, to_conjugate, write_orbit_csv
from .caustics import poncelet_polygon, resonance_report, resonant_lambda, write_polygon_csv
from .errors import ConvergenceError, DomainError
from .melnikov import classification_report, melnikov_profile, unperturbed_axes, write_profile_csv
from .persistence import DEFAULT_EPS, DEFAULT_GRID, default_grid, melnikov_consistency
from .tables import (
    EllipseTable,
    FourierSeries,
    PerturbedCircleTable,
    PerturbedEllipseTable,
    Table,
    table_from_dict,
)

COMMANDS = ("resonant", "poncelet", "melnikov", "classify", "persistence", "phase-portrait", "orbit")
FORMATS = ("csv", "json", "svg")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    table: dict
    m: int | None = None
    n: int | None = None
    eps: list[float] = field(default_factory=lambda: list(DEFAULT_EPS))
    grid: int | None = None
    phi0: float = 0.0
    theta0: float = math.pi / 3
    orbits: int = 20
    steps: int = 500
    format: str = "json"
    output: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise DomainError(f"unknown format {self.format!r}")
        if self.grid is not None and self.grid < 16:
            raise DomainError(f"grid size {self.grid} below 16")
        if self.orbits < 1 or self.steps < 1:
            raise DomainError("orbits and steps must be positive")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt(float(v)) if math.isfinite(v) else "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(obj) -> str:
    """JSON with every float at 17 significant digits; non-finite -> null."""
    return _json_value(obj) + "\n"


def _axes_of(table: Table) -> tuple[float, float]:
    if isinstance(table, EllipseTable):
        return table.a, table.b
    return unperturbed_axes(table)


def _require_mn(cfg: RunConfig) -> tuple[int, int]:
    if cfg.m is None or cfg.n is None:
        raise DomainError(f"{cfg.command} needs --m and --n")
    return cfg.m, cfg.n


def _svg(table: Table, poly) -> str:
    a, b = poly.params.a, poly.params.b
    lam = poly.params.lam
    phi = 2.0 * np.pi * np.arange(512) / 512
    bx, by = table.point(phi)
    r = 1.1 * float(np.max(np.hypot(bx, by)))
    pts = lambda xs, ys: " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs, ys))
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(-r)} {_fmt(-r)} {_fmt(2 * r)} {_fmt(2 * r)}" '
        'width="600" height="600">',
        '<g transform="scale(1,-1)" fill="none">',
        f'<polygon points="{pts(bx, by)}" stroke="black" stroke-width="{_fmt(r / 300)}"/>',
        f'<ellipse cx="0" cy="0" rx="{_fmt(math.sqrt(a * a - lam * lam))}" '
        f'ry="{_fmt(math.sqrt(b * b - lam * lam))}" stroke="steelblue" stroke-width="{_fmt(r / 400)}"/>',
        f'<polygon points="{pts(poly.x[:-1], poly.y[:-1])}" stroke="firebrick" stroke-width="{_fmt(r / 400)}"/>',
        "</g>",
        "</svg>",
    ]
    return "\n".join(lines) + "\n"


def _phase_portrait(table: Table, cfg: RunConfig, out: io.StringIO) -> None:
    out.write("orbit,step,phi,y\n")
    for i in range(cfg.orbits):
        p = PhasePoint(cfg.phi0, math.pi * (i + 0.5) / cfg.orbits).wrapped()
        for j in range(cfg.steps + 1):
            q = to_conjugate(table, p)
            out.write(f"{i},{j},{_fmt(q.phi)},{_fmt(q.y)}\n")
            if j < cfg.steps:
                p = step(table, p)


def run(cfg: RunConfig) -> str:
    """Execute one command and return the artifact text."""
    table = table_from_dict(cfg.table)
    out = io.StringIO()
    fmt = cfg.format

    if cfg.command in ("resonant", "poncelet"):
        m, n = _require_mn(cfg)
        params = resonant_lambda(*_axes_of(table), m, n)
        if cfg.command == "resonant":
            if fmt != "json":
                raise DomainError("resonant writes json only")
            out.write(dumps(resonance_report(params)))
        else:
            poly = poncelet_polygon(params, cfg.phi0)
            if fmt == "csv":
                write_polygon_csv(poly, out)
            elif fmt == "svg":
                out.write(_svg(table, poly))
            else:
                report = resonance_report(params)
                report.update(phi=list(poly.phi), x=list(poly.x), y=list(poly.y),
                              closure_error=poly.closure_error())
                out.write(dumps(report))

    elif cfg.command == "melnikov":
        m, n = _require_mn(cfg)
        profile = melnikov_profile(table, m, n, cfg.grid)
        if fmt == "csv":
            write_profile_csv(profile, out)
        elif fmt == "json":
            out.write(dumps({"m": m, "n": n, "phi": list(profile.grid), "L1": list(profile.values)}))
        else:
            raise DomainError("melnikov writes csv or json")

    elif cfg.command == "classify":
        m, n = _require_mn(cfg)
        if fmt != "json":
            raise DomainError("classify writes json only")
        out.write(dumps(classification_report(table, m, n, cfg.grid)))

    elif cfg.command == "persistence":
        m, n = _require_mn(cfg)
        grid = default_grid(cfg.grid or DEFAULT_GRID)
        report = melnikov_consistency(table, m, n, cfg.eps, grid)
        if fmt == "csv":
            report.write_samples_csv(out)
        elif fmt == "json":
            out.write(dumps(report.to_dict()))
        else:
            raise DomainError("persistence writes csv or json")

    elif cfg.command == "phase-portrait":
        if fmt != "csv":
            raise DomainError("phase-portrait writes csv only")
        _phase_portrait(table, cfg, out)

    elif cfg.command == "orbit":
        if fmt != "csv":
            raise DomainError("orbit writes csv only")
        write_orbit_csv(table, PhasePoint(cfg.phi0, cfg.theta0), cfg.steps, out)

    return out.getvalue()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="billiard-caustics", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    defaults = {
        "resonant": "json", "poncelet": "csv", "melnikov": "csv", "classify": "json",
        "persistence": "json", "phase-portrait": "csv", "orbit": "csv",
    }
    for name in COMMANDS:
        p = sub.add_parser(name)
        src = p.add_argument_group("table")
        src.add_argument("--table", help="table spec JSON file")
        src.add_argument("--type", choices=["ellipse", "perturbed_ellipse", "perturbed_circle"])
        src.add_argument("--a", type=float)
        src.add_argument("--b", type=float)
        src.add_argument("--r0", type=float)
        src.add_argument("--table-eps", type=float, default=0.0, help="eps of an inline table")
        src.add_argument("--mu1-const", type=float, default=0.0)
        src.add_argument("--mu1-cos", type=float, nargs="*", default=[])
        src.add_argument("--mu1-sin", type=float, nargs="*", default=[])
        p.add_argument("--m", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--eps", type=float, nargs="+", default=list(DEFAULT_EPS))
        p.add_argument("--grid", type=int)
        p.add_argument("--phi0", type=float, default=0.0)
        p.add_argument("--theta0", type=float, default=math.pi / 3)
        p.add_argument("--orbits", type=int, default=20)
        p.add_argument("--steps", type=int, default=500)
        p.add_argument("--format", choices=FORMATS, default=defaults[name])
        p.add_argument("--output", "-o")
    return parser


def _table_spec(args) -> dict:
    if args.table:
        with open(args.table, encoding="utf-8") as fh:
            return json.load(fh)
    kind = args.type
    if kind is None:
        if args.r0 is not None:
            kind = "perturbed_circle"
        elif args.a is not None and args.b is not None:
            kind = "ellipse"
        else:
            raise DomainError("give --table, or --a/--b, or --r0")
    series = FourierSeries(args.mu1_const, args.mu1_cos, args.mu1_sin).to_dict()
    if kind == "perturbed_circle":
        return {"type": kind, "r0": args.r0, "eps": args.table_eps, "mu1": series}
    spec = {"type": kind, "a": args.a, "b": args.b}
    if kind == "perturbed_ellipse":
        spec.update(eps=args.table_eps, mu1=series)
    return spec


def config_from_args(argv: Sequence[str] | None = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    return RunConfig(
        command=args.command, table=_table_spec(args), m=args.m, n=args.n, eps=args.eps,
        grid=args.grid, phi0=args.phi0, theta0=args.theta0, orbits=args.orbits,
        steps=args.steps, format=args.format, output=args.output,
    )


def _fail(kind: str, exc: BaseException, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc)}) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
        text = run(cfg)
        if cfg.output:
            with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    except (DomainError, json.JSONDecodeError) as exc:
        return _fail("domain", exc, 2)
    except OSError as exc:
        return _fail("io", exc, 2)
    except ConvergenceError as exc:
        return _fail("convergence", exc, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
