"""Subharmonic Melnikov potential of resonant caustics.

Three routes to the same function:

* ``melnikov_twist``: sum of the first-order generating function h1 over the
  unperturbed Poncelet polygon (general twist-map formula);
* ``melnikov_ellipse``: 2 lambda * sum mu1(phi_j), the closed form for the
  perturbed ellipse;
* ``melnikov_circle``: 2 r0 sin(m pi/n) * sum r1(theta + 2 pi m j/n).

``classify_constancy`` decides whether a sampled potential is constant, and
the ``predicted_*`` helpers give the verdict expected from the Fourier
structure of the perturbation.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import IO

import numpy as np

from .caustics import CausticParams, resonant_lambda
from .errors import ConvergenceError, DomainError
from .tables import FourierSeries, PerturbedCircleTable, PerturbedEllipseTable, Table

CONSTANCY_TOL = 1e-8
MIN_GRID = 256
RESOLUTION_TOL = 1e-10
MAX_GRID = 1 << 16


class Verdict(str, enum.Enum):
    CONSTANT = "Constant"
    NONCONSTANT = "Nonconstant"


@lru_cache(maxsize=256)
def _resonance(a: float, b: float, m: int, n: int) -> CausticParams:
    return resonant_lambda(a, b, m, n)


def polygon_angles(a: float, b: float, m: int, n: int, phi) -> np.ndarray:
    """Lifted vertex angles, shape phi.shape + (n+1,), of the (m, n)-gons from phi."""
    p = _resonance(a, b, m, n)
    t = p.t_of_phi(np.asarray(phi, dtype=float))
    return p.phi_of_t(np.add.outer(t, p.delta * np.arange(n + 1)))


def melnikov_ellipse(a: float, b: float, m: int, n: int, mu1: FourierSeries, phi):
    p = _resonance(a, b, m, n)
    angles = polygon_angles(a, b, m, n, phi)[..., :n]
    out = 2.0 * p.lam * np.sum(mu1(angles), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def unperturbed_axes(table: Table) -> tuple[float, float]:
    if isinstance(table, PerturbedEllipseTable):
        return table.base.a, table.base.b
    if isinstance(table, PerturbedCircleTable):
        return table.r0, table.r0
    raise DomainError(f"no unperturbed ellipse behind {type(table).__name__}")


def melnikov_twist(table: Table, m: int, n: int, phi):
    """sum_j h1(phi_j, phi_{j+1}) with h0 h1 = <d gamma0, d gamma1> along the polygon.

    Only the first variation of ``table`` is used; its eps is ignored.
    """
    a, b = unperturbed_axes(table)
    angles = polygon_angles(a, b, m, n, phi)
    x0, y0 = a * np.cos(angles), b * np.sin(angles)
    x1, y1 = table.first_variation(angles)
    dx0, dy0 = np.diff(x0, axis=-1), np.diff(y0, axis=-1)
    dx1, dy1 = np.diff(x1, axis=-1), np.diff(y1, axis=-1)
    h1 = (dx0 * dx1 + dy0 * dy1) / np.hypot(dx0, dy0)
    out = np.sum(h1, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def melnikov_circle(r0: float, m: int, n: int, r1: FourierSeries, theta):
    if n < 2 or math.gcd(m, n) != 1:
        raise DomainError(f"(m, n)=({m}, {n}) needs gcd 1 and n >= 2")
    theta = np.asarray(theta, dtype=float)
    angles = np.add.outer(theta, 2.0 * math.pi * m * np.arange(n) / n)
    out = 2.0 * r0 * math.sin(math.pi * m / n) * np.sum(r1(angles), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class PotentialProfile:
    m: int
    n: int
    grid: np.ndarray
    values: np.ndarray
    perturbation: FourierSeries

    @property
    def amplitude(self) -> float:
        return float(np.max(self.values) - np.min(self.values))

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def fourier(self) -> FourierSeries:
        return FourierSeries.fit(self.values)

    @property
    def spectral_tail(self) -> float:
        """Largest coefficient in the upper half of the fitted band over max(1, profile scale).

        Near the modulus cap the vertex map is steep and L1 needs many
        harmonics; a large tail means the fit (and its derivative) is aliased.
        """
        f = self.fourier
        amp = np.hypot(np.asarray(f.cos), np.asarray(f.sin))
        scale = max(float(amp.max(initial=0.0)), abs(f.const), 1.0)
        return float(amp[amp.size // 2 :].max(initial=0.0) / scale)

    def derivative(self, phi):
        """L1'(phi) by term-wise differentiation of the Fourier fit."""
        return self.fourier.derivative()(phi)


def default_grid_size(perturbation: FourierSeries, n: int) -> int:
    return max(MIN_GRID, 8 * perturbation.degree * n)


def _grid(size: int) -> np.ndarray:
    if size < 16:
        raise DomainError(f"grid size {size} below 16")
    return 2.0 * np.pi * np.arange(size) / size


def melnikov_profile(table: Table, m: int, n: int, grid_size: int | None = None) -> PotentialProfile:
    """Sample L1 on an equispaced grid for a perturbed ellipse or circle."""
    if isinstance(table, PerturbedEllipseTable):
        pert = table.mu1
        size = grid_size or default_grid_size(pert, n)
        grid = _grid(size)
        values = melnikov_ellipse(table.base.a, table.base.b, m, n, pert, grid)
    elif isinstance(table, PerturbedCircleTable):
        pert = table.r1
        size = grid_size or default_grid_size(pert, n)
        grid = _grid(size)
        values = melnikov_circle(table.r0, m, n, pert, grid)
    else:
        raise DomainError(f"no Melnikov potential for {type(table).__name__}")
    return PotentialProfile(m, n, grid, np.asarray(values), pert)


def resolved_profile(table: Table, m: int, n: int, grid_size: int | None = None,
                     tol: float = RESOLUTION_TOL, max_size: int = MAX_GRID) -> PotentialProfile:
    """Profile on a grid doubled until its spectral tail is below ``tol``."""
    size = grid_size or MIN_GRID
    while True:
        profile = melnikov_profile(table, m, n, size)
        if profile.spectral_tail <= tol:
            return profile
        size *= 2
        if size > max_size:
            raise ConvergenceError(
                f"L1 for (m, n)=({m}, {n}) not resolved on {max_size} points "
                f"(spectral tail {profile.spectral_tail:.2e})"
            )


def classify_constancy(profile: PotentialProfile, tol: float = CONSTANCY_TOL) -> Verdict:
    needed = 4 * max(1, profile.perturbation.degree) * profile.n
    if profile.grid.size < needed:
        raise DomainError(f"grid of {profile.grid.size} points too coarse; need {needed}")
    if profile.amplitude > tol * max(1.0, abs(profile.mean)):
        return Verdict.NONCONSTANT
    return Verdict.CONSTANT


def predicted_verdict_ellipse(mu1: FourierSeries, n: int) -> Verdict:
    """Constant iff mu1 is constant (odd n) or mu1' is pi-antiperiodic (even n)."""
    if n % 2:
        return Verdict.CONSTANT if mu1.is_constant() else Verdict.NONCONSTANT
    return Verdict.CONSTANT if mu1.has_only_odd_harmonics() else Verdict.NONCONSTANT


def predicted_verdict_circle(r1: FourierSeries, n: int) -> Verdict:
    """Nonconstant iff r1 has a nonzero harmonic whose order is a multiple of n."""
    if any(l % n == 0 for l in r1.harmonics()):
        return Verdict.NONCONSTANT
    return Verdict.CONSTANT


def classification_report(table: Table, m: int, n: int, grid_size: int | None = None,
                          tol: float = CONSTANCY_TOL) -> dict:
    profile = melnikov_profile(table, m, n, grid_size)
    verdict = classify_constancy(profile, tol)
    if isinstance(table, PerturbedEllipseTable):
        predicted = predicted_verdict_ellipse(table.mu1, n)
    else:
        predicted = predicted_verdict_circle(table.r1, n)
    return {
        "m": m,
        "n": n,
        "amplitude": profile.amplitude,
        "mean": profile.mean,
        "verdict": verdict.value,
        "predicted_verdict": predicted.value,
        "agree": verdict == predicted,
        # perturbations are trigonometric polynomials, hence entire
        "within_theorem_hypotheses": True,
    }


def write_profile_csv(profile: PotentialProfile, out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["phi", "L1"])
    for x, v in zip(profile.grid, profile.values):
        w.writerow([f"{x:.17g}", f"{v:.17g}"])
