"""Finite-eps check of the Melnikov prediction by direct simulation.

For a perturbed table and the (m, n)-resonant caustic of the unperturbed
one, each angle phi gets a momentum upsilon(phi) such that n bounces advance
phi by exactly 2 pi m; upsilon_star(phi) is the momentum on arrival. The gap
upsilon_star - upsilon is the derivative of the subharmonic potential, so
it should equal eps * L1'(phi) up to O(eps^2).

Momenta are the conjugate coordinate y = |gamma'(phi)| cos(theta).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import IO, Sequence

import numpy as np
from scipy.optimize import brentq

from .billiard_map import TWO_PI, ConjugatePoint, from_conjugate, step_lifted
from .caustics import CausticParams, caustic_phase_point, lambda_for_rotation, resonant_lambda
from .errors import ConvergenceError, DomainError
from .melnikov import resolved_profile, unperturbed_axes
from .tables import Table

DEFAULT_GRID = 128
DEFAULT_EPS = (1e-3, 5e-4, 2.5e-4)
RESIDUAL_TOL = 1e-11
BRACKET_FRACTION = 0.2


@dataclass(frozen=True)
class TwoGraphSample:
    phi: float
    upsilon: float
    upsilon_star: float

    @property
    def separation(self) -> float:
        return self.upsilon_star - self.upsilon


@lru_cache(maxsize=128)
def _caustics(a: float, b: float, m: int, n: int) -> tuple[CausticParams, list[CausticParams]]:
    """The resonant caustic and its neighbours at rotation numbers m/n +- 1/n^2."""
    res = resonant_lambda(a, b, m, n)
    rho = m / n
    neighbours = []
    for r in (rho - 1.0 / n**2, rho + 1.0 / n**2):
        try:
            neighbours.append(lambda_for_rotation(a, b, r))
        except (DomainError, ConvergenceError):
            # past the modulus cap; the other side still bounds the bracket
            continue
    if not neighbours:
        raise ConvergenceError(f"no neighbouring caustic for (m, n)=({m}, {n})")
    return res, neighbours


def caustic_momentum(table0: Table, params: CausticParams, phi: float) -> float:
    """y of the counterclockwise orbit tangent to C_lambda leaving gamma0(phi)."""
    theta = caustic_phase_point(params, phi).theta
    return float(table0.speed(phi) * math.cos(theta))


def unperturbed_momentum(family: Table, m: int, n: int, phi: float) -> float:
    a, b = unperturbed_axes(family)
    return caustic_momentum(family.with_eps(0.0), _caustics(a, b, m, n)[0], phi)


def bracket_halfwidth(family: Table, m: int, n: int, phi: float) -> float:
    """0.2 times the momentum spacing to the neighbouring caustics at phi.

    No other orbit of period <= n has a rotation number within 1/n^2 of m/n.
    """
    a, b = unperturbed_axes(family)
    res, neighbours = _caustics(a, b, m, n)
    table0 = family.with_eps(0.0)
    y0 = caustic_momentum(table0, res, phi)
    spacing = min(abs(caustic_momentum(table0, p, phi) - y0) for p in neighbours)
    return BRACKET_FRACTION * spacing


def _advance(table: Table, phi: float, y: float, n: int) -> tuple[float, float]:
    p = from_conjugate(table, ConjugatePoint(phi, y))
    x, theta = p.phi, p.theta
    for _ in range(n):
        x, theta = step_lifted(table, x, theta)
    return x, float(table.speed(x) * math.cos(theta))


def solve_upsilon(table: Table, m: int, n: int, phi: float, y_guess: float,
                  eta: float) -> TwoGraphSample:
    """Momentum y near y_guess with pi_1 f^n(phi, y) = phi + 2 pi m.

    Brent's method (bisection-safeguarded secant/inverse quadratic) on the
    bracket y_guess +- eta, which must show a sign change.
    """

    def G(y):
        return _advance(table, phi, y, n)[0] - phi - TWO_PI * m

    speed = float(table.speed(phi))
    lo = max(y_guess - eta, -speed * (1 - 1e-12))
    hi = min(y_guess + eta, speed * (1 - 1e-12))
    glo, ghi = G(lo), G(hi)
    if glo * ghi > 0:
        raise ConvergenceError(
            f"no (m, n)=({m}, {n}) return within |y - y_guess| < {eta:.3g} at phi={phi:.6f}"
        )
    y = brentq(G, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    x_end, y_star = _advance(table, phi, y, n)
    resid = x_end - phi - TWO_PI * m
    if abs(resid) > RESIDUAL_TOL:
        raise ConvergenceError(f"return residual {resid:.3e} above {RESIDUAL_TOL} at phi={phi:.6f}")
    return TwoGraphSample(float(phi), float(y), y_star)


def default_grid(size: int = DEFAULT_GRID) -> np.ndarray:
    if size < 16:
        raise DomainError(f"grid size {size} below 16")
    return TWO_PI * np.arange(size) / size


def separation_profile(family: Table, m: int, n: int, eps: float,
                       grid: Sequence[float] | None = None) -> list[TwoGraphSample]:
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    table = family.with_eps(eps)
    samples = []
    for phi in grid:
        y0 = unperturbed_momentum(family, m, n, phi)
        eta = bracket_halfwidth(family, m, n, phi)
        samples.append(solve_upsilon(table, m, n, phi, y0, eta))
    return samples


def local_twist(table: Table, n: int, phi: float, y: float, h: float = 1e-6) -> float:
    """Central difference of pi_1 f^n in y at (phi, y)."""
    return (_advance(table, phi, y + h, n)[0] - _advance(table, phi, y - h, n)[0]) / (2 * h)


@dataclass
class ConsistencyReport:
    m: int
    n: int
    eps_list: list[float]
    grid: np.ndarray
    sup_err_per_eps: list[float]
    mean_separation_per_eps: list[float]
    fitted_order: float
    monotone: bool
    verdict: str
    samples: dict[float, list[TwoGraphSample]] = field(repr=False)
    l1_prime: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "eps_list": list(self.eps_list),
            "sup_err_per_eps": list(self.sup_err_per_eps),
            "mean_separation_per_eps": list(self.mean_separation_per_eps),
            "fitted_order": self.fitted_order,
            "monotone": self.monotone,
            "verdict": self.verdict,
        }

    def write_samples_csv(self, out: IO[str]) -> None:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["eps", "phi", "upsilon", "upsilon_star", "separation", "eps_times_L1prime"])
        for eps in self.eps_list:
            for s, d in zip(self.samples[eps], self.l1_prime):
                row = (eps, s.phi, s.upsilon, s.upsilon_star, s.separation, eps * d)
                w.writerow([f"{v:.17g}" for v in row])


# errors below this are solver noise, not an O(eps) remainder
NOISE_FLOOR = 1e-8


def melnikov_consistency(family: Table, m: int, n: int,
                         eps_list: Sequence[float] = DEFAULT_EPS,
                         grid: Sequence[float] | None = None) -> ConsistencyReport:
    """Compare separation/eps with L1' for each eps and fit err ~ C eps^p."""
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 2 or any(e <= 0 for e in eps_list):
        raise DomainError("need at least two positive eps values")
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise DomainError("eps values must be strictly decreasing")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)

    profile = resolved_profile(family, m, n)
    d_l1 = np.asarray(profile.derivative(grid))

    samples, errs, means = {}, [], []
    for eps in eps_list:
        samples[eps] = separation_profile(family, m, n, eps, grid)
        sep = np.array([s.separation for s in samples[eps]])
        errs.append(float(np.max(np.abs(sep / eps - d_l1))))
        means.append(float(np.mean(sep)))

    monotone = all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))
    if max(errs) <= NOISE_FLOOR:
        order, verdict = math.nan, "exact"
    else:
        order = float(np.polyfit(np.log(eps_list), np.log(errs), 1)[0])
        if not monotone:
            verdict = "non-monotone"
        elif order >= 0.7:
            verdict = "consistent"
        else:
            verdict = "inconsistent"
    return ConsistencyReport(m, n, eps_list, grid, errs, means, order, monotone, verdict,
                             samples, d_l1)
