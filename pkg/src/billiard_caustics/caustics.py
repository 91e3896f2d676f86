"""Confocal elliptical caustics of the ellipse x^2/a^2 + y^2/b^2 = 1.

A caustic C_lambda, 0 < lambda < b, is described by the modulus k and the
shift delta that make the bounces on it rigid, t -> t + delta, in the angular
parameter t = F(phi + pi/2, k); a full turn adds 4K. ``a == b`` is the
circle, k = 0.

The quarter-turn origin of t matters: increments of F(phi, k) itself are not
constant along caustic orbits, increments of F(phi + pi/2, k) are.

Caustics close to the focal segment (lambda -> b, k -> 1) are ill-conditioned
in lambda, so the internal unknown is the gap b - lambda.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from .billiard_map import TWO_PI, PhasePoint, wrap
from .errors import ConvergenceError, DomainError
from .special_functions import MAX_MODULUS, am, complete_K, incomplete_F

BISECTION_MAXITER = 200
QUARTER = 0.5 * math.pi


@dataclass(frozen=True)
class CausticParams:
    a: float
    b: float
    lam: float
    k: float
    kc: float
    delta: float
    K: float
    m: int | None = None
    n: int | None = None

    @property
    def rho(self) -> float:
        """Rotation number delta / 4K."""
        return self.delta / (4.0 * self.K)

    @property
    def resonance_residual(self) -> float:
        if self.m is None:
            raise DomainError("caustic is not tagged with a resonance (m, n)")
        return abs(self.n * self.delta - 4.0 * self.K * self.m)

    def t_of_phi(self, phi):
        """Angular parameter in which the caustic dynamics is rigid."""
        return incomplete_F(np.add(phi, QUARTER), self.k, self.kc)

    def phi_of_t(self, t):
        return np.subtract(am(t, self.k, self.kc), QUARTER)


def _check_axes(a: float, b: float) -> None:
    if not (a >= b > 0):
        raise DomainError(f"need a >= b > 0, got a={a}, b={b}")


def _from_gap(a: float, b: float, gap: float) -> CausticParams:
    lam = b - gap
    s2 = gap * (2.0 * b - gap)  # b^2 - lambda^2
    # a^2 - lambda^2 from gap, not the rounded lambda, so that k^2 + k'^2 = 1
    d2 = ((a - b) + gap) * ((a + b) - gap)
    k = math.sqrt((a - b) * (a + b) / d2)
    kc = math.sqrt(s2 / d2)
    if k >= MAX_MODULUS:
        raise DomainError(f"caustic lambda={lam} too close to b: modulus {k} >= 1 - 1e-9")
    K = complete_K(k, kc)
    # half shift F(theta*/2) with sin(theta*/2) = lambda/b; past pi/4 use
    # F(pi/2 - x) = K - F(psi), tan(psi) = tan(x)/k', to keep precision
    half = math.atan2(lam, math.sqrt(s2))
    if half <= 0.25 * math.pi:
        delta = 2.0 * incomplete_F(half, k, kc)
    else:
        x = math.atan2(math.sqrt(s2), lam)
        psi = math.atan2(math.sin(x), kc * math.cos(x))
        delta = 2.0 * (K - incomplete_F(psi, k, kc))
    return CausticParams(a, b, lam, k, kc, delta, K)


def caustic_params(a: float, b: float, lam: float) -> CausticParams:
    _check_axes(a, b)
    if not (0.0 < lam < b):
        raise DomainError(f"caustic parameter {lam} outside (0, b={b})")
    return _from_gap(a, b, b - lam)


def _gap_bounds(a: float, b: float) -> tuple[float, float]:
    """Admissible gap interval: lambda in (0, b), modulus below the cap."""
    lo = 1e-9 * b
    if a > b:
        # small-gap expansion of k'^2 ~ 2 b gap / (a^2 - b^2), with margin
        kc2 = 1.0 - (MAX_MODULUS - 1e-9) ** 2
        lo = max(lo, 1.01 * kc2 * (a - b) * (a + b) / (2.0 * b))
    return lo, b * (1.0 - 1e-9)


def _bisect(g, lo: float, hi: float, rtol: float) -> float:
    glo, ghi = g(lo), g(hi)
    if glo * ghi > 0:
        raise ConvergenceError(f"no sign change on [{lo}, {hi}]")
    for _ in range(BISECTION_MAXITER):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


def lambda_for_rotation(a: float, b: float, rho: float) -> CausticParams:
    """Caustic with a prescribed rotation number in (0, 1/2)."""
    _check_axes(a, b)
    if not (0.0 < rho < 0.5):
        raise DomainError(f"rotation number {rho} outside (0, 1/2)")
    if a == b:
        return caustic_params(a, b, b * math.sin(math.pi * rho))
    gap = _bisect(lambda gap: _from_gap(a, b, gap).rho - rho, *_gap_bounds(a, b), 1e-16)
    return _from_gap(a, b, gap)


def resonant_lambda(a: float, b: float, m: int, n: int) -> CausticParams:
    """The unique caustic with n delta = 4 K m, i.e. rotation number m/n.

    Bisection on the gap b - lambda of n delta - 4 K m, which is monotone
    because the rotation number increases with lambda.
    """
    _check_axes(a, b)
    if not (isinstance(m, (int, np.integer)) and isinstance(n, (int, np.integer))):
        raise DomainError("m and n must be integers")
    if m < 1 or 2 * m >= n or math.gcd(m, n) != 1:
        raise DomainError(f"(m, n)=({m}, {n}) needs gcd 1 and 1 <= m < n/2")

    if a == b:
        p = caustic_params(a, b, b * math.sin(math.pi * m / n))
    else:

        def g(gap):
            p = _from_gap(a, b, gap)
            return n * p.delta - 4.0 * p.K * m

        lo, hi = _gap_bounds(a, b)
        if g(lo) <= 0:
            raise ConvergenceError(f"({m}, {n}) resonance lies beyond the modulus cap")
        p = _from_gap(a, b, _bisect(g, lo, hi, 1e-16))
    return CausticParams(p.a, p.b, p.lam, p.k, p.kc, p.delta, p.K, int(m), int(n))


@dataclass(frozen=True)
class PonceletPolygon:
    params: CausticParams
    t: np.ndarray  # t_0..t_n
    phi: np.ndarray  # lifted phi_0..phi_n, phi_n = phi_0 + 2 pi m
    x: np.ndarray
    y: np.ndarray

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def n(self) -> int:
        return self.params.n

    def vertices(self) -> np.ndarray:
        """Array of shape (n+1, 2); the last row closes the polygon."""
        return np.column_stack([self.x, self.y])

    def closure_error(self) -> float:
        return float(math.hypot(self.x[-1] - self.x[0], self.y[-1] - self.y[0]))


def rigid_orbit(params: CausticParams, phi0: float, steps: int, direction: int = 1):
    """Parameters and lifted angles of ``steps`` bounces on C_lambda from phi0."""
    t = params.t_of_phi(phi0) + direction * params.delta * np.arange(steps + 1)
    return t, params.phi_of_t(t)


def poncelet_polygon(params: CausticParams, phi0: float) -> PonceletPolygon:
    if params.m is None:
        raise DomainError("poncelet_polygon needs resonant caustic parameters")
    if params.resonance_residual > 1e-9:
        raise DomainError(f"parameters are not resonant: |n delta - 4Km| = {params.resonance_residual}")
    t, phi = rigid_orbit(params, phi0, params.n)
    return PonceletPolygon(params, t, phi, params.a * np.cos(phi), params.b * np.sin(phi))


def tangency_lambda(q, p, a: float, b: float) -> float:
    """Caustic parameter of the confocal conic tangent to the line q + tau p."""
    x, y = q
    u, v = p
    inner = x * u / (a * a) + y * v / (b * b)
    if inner > 0:
        raise DomainError("direction points outward at q")
    return float(-a * b * inner)


def _unit(dx, dy):
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        raise DomainError("coincident impact points")
    return dx / norm, dy / norm


def tangency_invariant(q_prev, q, q_next, a: float, b: float) -> float:
    """a b <p_{j-1} - p_j, D^-2 q_j>, equal to 2 lambda on C_lambda orbits."""
    u0, v0 = _unit(q[0] - q_prev[0], q[1] - q_prev[1])
    u1, v1 = _unit(q_next[0] - q[0], q_next[1] - q[1])
    return float(a * b * ((u0 - u1) * q[0] / (a * a) + (v0 - v1) * q[1] / (b * b)))


def incidence_angle(a: float, b: float, phi: float, phi_next: float) -> float:
    """Angle between the ellipse tangent at phi and the chord to phi_next."""
    tx, ty = -a * math.sin(phi), b * math.cos(phi)
    cx = a * (math.cos(phi_next) - math.cos(phi))
    cy = b * (math.sin(phi_next) - math.sin(phi))
    return math.atan2(tx * cy - ty * cx, tx * cx + ty * cy)


def caustic_phase_point(params: CausticParams, phi0: float) -> PhasePoint:
    """Start (phi0, theta^-) of the counterclockwise orbit tangent to C_lambda.

    theta is read off the direction to the next rigid-dynamics vertex.
    """
    _, phi = rigid_orbit(params, phi0, 1)
    return PhasePoint(phi0, incidence_angle(params.a, params.b, phi0, float(phi[1])))


def ellipse_step(a: float, b: float, p: PhasePoint) -> PhasePoint:
    """Closed-form bounce on the exact ellipse through t -> t +- delta.

    Only trajectories with an elliptical caustic are covered.
    """
    tx, ty = -a * math.sin(p.phi), b * math.cos(p.phi)
    norm = math.hypot(tx, ty)
    c, s = math.cos(p.theta), math.sin(p.theta)
    u, v = (c * tx - s * ty) / norm, (c * ty + s * tx) / norm
    q = (a * math.cos(p.phi), b * math.sin(p.phi))
    lam = abs(tangency_lambda(q, (u, v), a, b))
    if not 0.0 < lam < b:
        raise DomainError(f"trajectory has no elliptical caustic (lambda={lam})")
    params = caustic_params(a, b, lam)
    # counterclockwise motion around the caustic iff theta < pi/2
    direction = 1 if p.theta < math.pi / 2 else -1
    _, phi = rigid_orbit(params, p.phi, 1, direction)
    phi_next = float(phi[1]) if direction == 1 else float(phi[1]) + TWO_PI
    return PhasePoint(wrap(phi_next), _exit_angle_ellipse(a, b, p.phi, phi_next))


def _exit_angle_ellipse(a: float, b: float, phi: float, phi_next: float) -> float:
    cx = a * (math.cos(phi_next) - math.cos(phi))
    cy = b * (math.sin(phi_next) - math.sin(phi))
    tx, ty = -a * math.sin(phi_next), b * math.cos(phi_next)
    return math.atan2(cx * ty - cy * tx, cx * tx + cy * ty)


def write_polygon_csv(poly: PonceletPolygon, out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["j", "t_j", "phi_j", "x_j", "y_j"])
    for j in range(poly.n + 1):
        w.writerow([j, *(f"{v:.17g}" for v in (poly.t[j], poly.phi[j], poly.x[j], poly.y[j]))])


def resonance_report(params: CausticParams) -> dict:
    return {
        "m": params.m,
        "n": params.n,
        "lambda": params.lam,
        "k": params.k,
        "delta": params.delta,
        "K": params.K,
        "rho": params.rho,
        "rho_residual": params.resonance_residual,
    }
