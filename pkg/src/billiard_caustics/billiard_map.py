"""The billiard map f(phi, theta) = (phi', theta') on any convex table.

The next impact is found by exact chord tracing: a coarse scan brackets the
single sign change of cross(ray, gamma(psi) - gamma(phi)) on (phi, phi + 2 pi),
then a bisection-safeguarded Newton iteration polishes it. Angles are kept on
the universal cover internally; ``PhasePoint`` carries the wrapped angle.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .errors import ConvergenceError, DomainError
from .tables import Table

TWO_PI = 2.0 * math.pi

SCAN_SAMPLES = 720
EDGE = 1e-6
NEWTON_TOL = 1e-12
NEWTON_MAXITER = 100


def wrap(phi: float) -> float:
    w = float(phi) % TWO_PI
    return 0.0 if w >= TWO_PI else w


@dataclass(frozen=True)
class PhasePoint:
    phi: float
    theta: float

    def __post_init__(self):
        if not (0.0 < self.theta < math.pi):
            raise DomainError(f"incidence angle {self.theta!r} not in (0, pi)")

    def wrapped(self) -> PhasePoint:
        return PhasePoint(wrap(self.phi), self.theta)

    def reversed(self) -> PhasePoint:
        return PhasePoint(self.phi, math.pi - self.theta)


@dataclass(frozen=True)
class ConjugatePoint:
    phi: float
    y: float


def generating_h(table: Table, phi: float, phi_next: float) -> float:
    """Chord length |gamma(phi) - gamma(phi')|."""
    if math.isclose(wrap(phi - phi_next), 0.0, abs_tol=1e-15) or math.isclose(
        wrap(phi - phi_next), TWO_PI, abs_tol=1e-15
    ):
        raise DomainError("generating function undefined at coincident angles")
    x0, y0 = table.point(phi)
    x1, y1 = table.point(phi_next)
    return float(math.hypot(x1 - x0, y1 - y0))


def generating_h_partials(table: Table, phi: float, phi_next: float) -> tuple[float, float]:
    """Analytic (d1 h, d2 h) of the chord length."""
    h = generating_h(table, phi, phi_next)
    x0, y0 = table.point(phi)
    x1, y1 = table.point(phi_next)
    t0x, t0y = table.tangent(phi)
    t1x, t1y = table.tangent(phi_next)
    dx, dy = x1 - x0, y1 - y0
    return float(-(dx * t0x + dy * t0y) / h), float((dx * t1x + dy * t1y) / h)


def to_conjugate(table: Table, p: PhasePoint) -> ConjugatePoint:
    return ConjugatePoint(p.phi, float(table.speed(p.phi) * math.cos(p.theta)))


def from_conjugate(table: Table, q: ConjugatePoint) -> PhasePoint:
    speed = float(table.speed(q.phi))
    if not abs(q.y) < speed:
        raise DomainError(f"momentum |y|={abs(q.y)} not below |gamma'|={speed}")
    return PhasePoint(q.phi, math.acos(q.y / speed))


def _ray(table: Table, phi: float, theta: float):
    tx, ty = table.tangent(phi)
    norm = math.hypot(tx, ty)
    tx, ty = tx / norm, ty / norm
    c, s = math.cos(theta), math.sin(theta)
    # rotate the unit tangent by theta towards the interior (left normal)
    return c * tx - s * ty, c * ty + s * tx


def _next_impact(table: Table, phi: float, theta: float) -> float:
    dx, dy = _ray(table, phi, theta)
    x0, y0 = table.point(phi)

    def g(psi):
        x, y = table.point(psi)
        return dx * (y - y0) - dy * (x - x0)

    psi = phi + EDGE + (TWO_PI - 2 * EDGE) * np.arange(SCAN_SAMPLES) / (SCAN_SAMPLES - 1)
    vals = g(psi)
    neg = vals < 0
    if not neg[0] or neg[-1]:
        raise ConvergenceError(f"no bracketed impact from phi={phi}, theta={theta}")
    i = int(np.argmin(neg))  # first nonnegative sample
    if neg[i:].any():
        raise ConvergenceError(f"several chord crossings from phi={phi}, theta={theta}: table not convex?")
    lo, hi = float(psi[i - 1]), float(psi[i])
    if vals[i] == 0:
        return hi

    x = lo - vals[i - 1] * (hi - lo) / (vals[i] - vals[i - 1])
    for _ in range(NEWTON_MAXITER):
        gx = float(g(x))
        if gx == 0.0:
            return x
        if gx < 0:
            lo = x
        else:
            hi = x
        tx, ty = table.tangent(x)
        slope = float(dx * ty - dy * tx)
        new = x - gx / slope if slope > 0 else 0.5 * (lo + hi)
        if not lo < new < hi:
            new = 0.5 * (lo + hi)
        done = abs(new - x) <= NEWTON_TOL
        x = new
        if done:
            # one more Newton step from a converged iterate is free accuracy
            gx = float(g(x))
            tx, ty = table.tangent(x)
            slope = float(dx * ty - dy * tx)
            new = x - gx / slope
            return new if lo <= new <= hi else x
    raise ConvergenceError(f"impact solve did not converge from phi={phi}, theta={theta}")


def _exit_angle(table: Table, phi: float, phi_next: float) -> float:
    x0, y0 = table.point(phi)
    x1, y1 = table.point(phi_next)
    cx, cy = x1 - x0, y1 - y0
    tx, ty = table.tangent(phi_next)
    return math.atan2(float(cx * ty - cy * tx), float(cx * tx + cy * ty))


def step_lifted(table: Table, phi: float, theta: float) -> tuple[float, float]:
    """One bounce on the universal cover: phi' in (phi, phi + 2 pi)."""
    if not (0.0 < theta < math.pi):
        raise DomainError(f"incidence angle {theta!r} not in (0, pi)")
    phi_next = float(_next_impact(table, phi, theta))
    theta_next = _exit_angle(table, phi, phi_next)
    if not (0.0 < theta_next < math.pi):
        raise ConvergenceError(f"reflected angle {theta_next} left (0, pi)")
    return phi_next, theta_next


def step(table: Table, p: PhasePoint) -> PhasePoint:
    phi_next, theta_next = step_lifted(table, p.phi, p.theta)
    return PhasePoint(wrap(phi_next), theta_next)


def orbit(table: Table, p: PhasePoint, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Lifted angles and incidence angles of n bounces, start included."""
    phis = np.empty(n + 1)
    thetas = np.empty(n + 1)
    phis[0], thetas[0] = p.phi, p.theta
    for j in range(n):
        phis[j + 1], thetas[j + 1] = step_lifted(table, phis[j], thetas[j])
    return phis, thetas


def step_n(table: Table, p: PhasePoint, n: int) -> tuple[PhasePoint, int]:
    """n-fold composition; returns the wrapped end point and the winding.

    The winding is the number of times the lifted angle passes a multiple of
    2 pi, counted from the wrapped start, so it is additive along an orbit.
    """
    if n < 1:
        raise DomainError("n must be a positive integer")
    start = wrap(p.phi)
    phis, thetas = orbit(table, PhasePoint(start, p.theta), n)
    winding = math.floor(phis[-1] / TWO_PI)
    end = phis[-1] - TWO_PI * winding
    if end >= TWO_PI:
        end, winding = 0.0, winding + 1
    return PhasePoint(end, float(thetas[-1])), winding


def conjugate_step(table: Table, phi: float, y: float) -> tuple[float, float]:
    """The map in (phi, y) coordinates, lifted in phi."""
    p = from_conjugate(table, ConjugatePoint(phi, y))
    phi_next, theta_next = step_lifted(table, p.phi, p.theta)
    return phi_next, float(table.speed(phi_next) * math.cos(theta_next))


def jacobian_determinant(table: Table, phi: float, y: float, h: float = 1e-6) -> float:
    """det Df in (phi, y) by fourth-order central differences of step h.

    The second-order stencil leaves an O(h^2) truncation error that exceeds
    1e-6 near grazing incidence, where the partials of f are large.
    """

    def d(f, x):
        return (8.0 * np.subtract(f(x + h), f(x - h)) - np.subtract(f(x + 2 * h), f(x - 2 * h))) / (12.0 * h)

    a = d(lambda p: conjugate_step(table, p, y), phi)
    b = d(lambda q: conjugate_step(table, phi, q), y)
    return float(a[0] * b[1] - a[1] * b[0])


def write_orbit_csv(table: Table, p: PhasePoint, n: int, out: IO[str]) -> None:
    phis, thetas = orbit(table, p, n)
    x, y = table.point(phis)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["step", "phi_lifted", "theta", "x", "y_cartesian"])
    for j in range(n + 1):
        w.writerow([j, *(f"{v:.17g}" for v in (phis[j], thetas[j], x[j], y[j]))])
