"""Billiard tables: the ellipse, the perturbed ellipse and the perturbed circle.

Every table exposes ``point``, ``tangent`` and ``second_derivative`` of a
counterclockwise 2*pi-periodic parametrization. Each returns an ``(x, y)``
tuple whose entries follow the shape of ``phi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

CONVEXITY_SAMPLES = 1024


@dataclass(frozen=True)
class FourierSeries:
    """Real trigonometric polynomial const + sum_l c_l cos(l x) + s_l sin(l x)."""

    const: float = 0.0
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "const", float(self.const))
        object.__setattr__(self, "cos", tuple(float(c) for c in self.cos))
        object.__setattr__(self, "sin", tuple(float(s) for s in self.sin))

    @classmethod
    def zero(cls) -> FourierSeries:
        return cls()

    @classmethod
    def harmonic(cls, l: int, kind: str = "cos", amplitude: float = 1.0) -> FourierSeries:
        if l == 0:
            return cls(const=amplitude)
        coeffs = [0.0] * l
        coeffs[l - 1] = amplitude
        return cls(cos=coeffs) if kind == "cos" else cls(sin=coeffs)

    @classmethod
    def fit(cls, values: Sequence[float], degree: int | None = None) -> FourierSeries:
        """Discrete Fourier analysis of samples at x_i = 2*pi*i/N, i < N."""
        values = np.asarray(values, dtype=float)
        n = values.size
        max_degree = (n - 1) // 2
        if degree is None:
            degree = max_degree
        if degree > max_degree:
            raise DomainError(f"degree {degree} needs more than {n} samples")
        c = np.fft.rfft(values) / n
        return cls(
            const=c[0].real,
            cos=tuple(2.0 * c[1 : degree + 1].real),
            sin=tuple(-2.0 * c[1 : degree + 1].imag),
        )

    @classmethod
    def from_dict(cls, d: dict) -> FourierSeries:
        unknown = set(d) - {"const", "cos", "sin"}
        if unknown:
            raise DomainError(f"unknown Fourier series fields {sorted(unknown)}")
        return cls(d.get("const", 0.0), d.get("cos", ()), d.get("sin", ()))

    def to_dict(self) -> dict:
        return {"const": self.const, "cos": list(self.cos), "sin": list(self.sin)}

    @property
    def degree(self) -> int:
        d = 0
        for l in range(1, max(len(self.cos), len(self.sin)) + 1):
            if self.coefficient(l) != (0.0, 0.0):
                d = l
        return d

    def coefficient(self, l: int) -> tuple[float, float]:
        """(cos, sin) coefficients of harmonic ``l``; the constant for l=0."""
        if l == 0:
            return self.const, 0.0
        c = self.cos[l - 1] if l <= len(self.cos) else 0.0
        s = self.sin[l - 1] if l <= len(self.sin) else 0.0
        return c, s

    def harmonics(self) -> list[int]:
        """Orders l >= 1 carrying a nonzero coefficient."""
        return [l for l in range(1, self.degree + 1) if self.coefficient(l) != (0.0, 0.0)]

    def is_constant(self) -> bool:
        return self.degree == 0

    def has_only_odd_harmonics(self) -> bool:
        """True iff the derivative is pi-antiperiodic."""
        return all(l % 2 == 1 for l in self.harmonics())

    def derivative(self) -> FourierSeries:
        return self._derivative

    @cached_property
    def _derivative(self) -> FourierSeries:
        cos = [l * self.coefficient(l)[1] for l in range(1, self.degree + 1)]
        sin = [-l * self.coefficient(l)[0] for l in range(1, self.degree + 1)]
        return FourierSeries(0.0, cos, sin)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, self.const)
        for l, c in enumerate(self.cos, start=1):
            if c:
                out = out + c * np.cos(l * x)
        for l, s in enumerate(self.sin, start=1):
            if s:
                out = out + s * np.sin(l * x)
        return float(out) if out.ndim == 0 else out


class Table:
    """Common interface of the closed strictly convex billiard boundaries."""

    def point(self, phi):
        raise NotImplementedError

    def tangent(self, phi):
        raise NotImplementedError

    def second_derivative(self, phi):
        raise NotImplementedError

    def speed(self, phi):
        tx, ty = self.tangent(phi)
        return np.hypot(tx, ty)

    def curvature(self, phi):
        """Signed curvature; positive everywhere for a convex CCW table."""
        tx, ty = self.tangent(phi)
        ax, ay = self.second_derivative(phi)
        return (tx * ay - ty * ax) / np.hypot(tx, ty) ** 3

    def check_convex(self, samples: int = CONVEXITY_SAMPLES) -> None:
        phi = 2.0 * np.pi * np.arange(samples) / samples
        kappa = self.curvature(phi)
        if not np.all(kappa > 0):
            i = int(np.argmin(kappa))
            raise DomainError(
                f"table is not strictly convex: curvature {kappa[i]:.3e} at phi={phi[i]:.6f}"
            )


@dataclass(frozen=True)
class EllipseTable(Table):
    """x = a cos(phi), y = b sin(phi). ``a == b`` is accepted as the circle."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a >= self.b > 0):
            raise DomainError(f"ellipse needs a >= b > 0, got a={self.a}, b={self.b}")

    @property
    def c(self) -> float:
        return math.sqrt((self.a - self.b) * (self.a + self.b))

    @property
    def mu0(self) -> float:
        if self.a == self.b:
            raise DomainError("elliptic coordinates are undefined for a circle")
        return math.atanh(self.b / self.a)

    def point(self, phi):
        return self.a * np.cos(phi), self.b * np.sin(phi)

    def tangent(self, phi):
        return -self.a * np.sin(phi), self.b * np.cos(phi)

    def second_derivative(self, phi):
        return -self.a * np.cos(phi), -self.b * np.sin(phi)


def _convexity_bound(make: Callable[[float], Table], hi: float = 1.0) -> float:
    """Largest |eps| (bisected to 1e-6 relative) keeping ``make(+-eps)`` convex."""

    def convex(eps: float) -> bool:
        try:
            make(eps).check_convex()
            make(-eps).check_convex()
        except DomainError:
            return False
        return True

    while convex(hi):
        hi *= 2.0
        if hi > 1e6:
            return math.inf
    lo = 0.0
    while hi - lo > 1e-6 * hi:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if convex(mid) else (lo, mid)
    return lo


@dataclass(frozen=True)
class PerturbedEllipseTable(Table):
    """mu = mu0 + eps * mu1(phi) in the elliptic coordinates of ``base``.

    With u = eps*mu1(phi) the boundary is
    ((a cosh u + b sinh u) cos phi, (b cosh u + a sinh u) sin phi),
    which equals (c cosh mu cos phi, c sinh mu sin phi) and reduces to the
    base ellipse bit-for-bit at eps = 0.
    """

    base: EllipseTable
    eps: float
    mu1: FourierSeries = field(default_factory=FourierSeries)

    def __post_init__(self):
        self.check_convex()

    def with_eps(self, eps: float) -> PerturbedEllipseTable:
        return PerturbedEllipseTable(self.base, eps, self.mu1)

    def convexity_bound(self) -> float:
        return _convexity_bound(lambda e: _unchecked(PerturbedEllipseTable, self.base, e, self.mu1))

    def _radii(self, phi):
        u = self.eps * self.mu1(phi)
        ch, sh = np.cosh(u), np.sinh(u)
        a, b = self.base.a, self.base.b
        return a * ch + b * sh, b * ch + a * sh

    def point(self, phi):
        A, B = self._radii(phi)
        return A * np.cos(phi), B * np.sin(phi)

    def tangent(self, phi):
        A, B = self._radii(phi)
        du = self.eps * self.mu1.derivative()(phi)
        c, s = np.cos(phi), np.sin(phi)
        return du * B * c - A * s, du * A * s + B * c

    def second_derivative(self, phi):
        A, B = self._radii(phi)
        d1 = self.mu1.derivative()
        du = self.eps * d1(phi)
        ddu = self.eps * d1.derivative()(phi)
        c, s = np.cos(phi), np.sin(phi)
        x2 = (ddu * B + du * du * A - A) * c - 2.0 * du * B * s
        y2 = (ddu * A + du * du * B - B) * s + 2.0 * du * A * c
        return x2, y2

    def first_variation(self, phi):
        """d/d(eps) of the boundary at eps=0: a b mu1(phi) D^-2 gamma0(phi)."""
        m = self.mu1(phi)
        return self.base.b * m * np.cos(phi), self.base.a * m * np.sin(phi)


@dataclass(frozen=True)
class PerturbedCircleTable(Table):
    """Polar boundary r = r0 (1 + eps r1(theta))."""

    r0: float
    eps: float
    r1: FourierSeries = field(default_factory=FourierSeries)

    def __post_init__(self):
        if not self.r0 > 0:
            raise DomainError(f"radius must be positive, got {self.r0}")
        theta = 2.0 * np.pi * np.arange(CONVEXITY_SAMPLES) / CONVEXITY_SAMPLES
        if not np.all(self.radius(theta) > 0):
            raise DomainError("perturbed radius is not positive")
        self.check_convex()

    def with_eps(self, eps: float) -> PerturbedCircleTable:
        return PerturbedCircleTable(self.r0, eps, self.r1)

    def convexity_bound(self) -> float:
        return _convexity_bound(lambda e: _unchecked(PerturbedCircleTable, self.r0, e, self.r1))

    def radius(self, theta):
        return self.r0 * (1.0 + self.eps * self.r1(theta))

    def point(self, theta):
        r = self.radius(theta)
        return r * np.cos(theta), r * np.sin(theta)

    def tangent(self, theta):
        r = self.radius(theta)
        dr = self.r0 * self.eps * self.r1.derivative()(theta)
        c, s = np.cos(theta), np.sin(theta)
        return dr * c - r * s, dr * s + r * c

    def second_derivative(self, theta):
        r = self.radius(theta)
        d1 = self.r1.derivative()
        dr = self.r0 * self.eps * d1(theta)
        ddr = self.r0 * self.eps * d1.derivative()(theta)
        c, s = np.cos(theta), np.sin(theta)
        return ddr * c - 2.0 * dr * s - r * c, ddr * s + 2.0 * dr * c - r * s

    def first_variation(self, theta):
        m = self.r0 * self.r1(theta)
        return m * np.cos(theta), m * np.sin(theta)


def _unchecked(cls, *args):
    obj = object.__new__(cls)
    for name, value in zip(cls.__dataclass_fields__, args):
        object.__setattr__(obj, name, value)
    return obj


def boundary_point(table: Table, phi):
    return table.point(phi)


def boundary_tangent(table: Table, phi):
    return table.tangent(phi)


def first_variation(table: PerturbedEllipseTable, phi):
    return table.first_variation(phi)


def cartesian_perturbation_to_mu1(
    P1: Callable, a: float, b: float, degree: int = 64, samples: int | None = None
) -> tuple[FourierSeries, float]:
    """Elliptic-coordinate profile mu1 of the curve x^2/a^2 + y^2/b^2 + eps P1 = 1.

    Solves 2 (a^2 sin^2 + b^2 cos^2) mu1 + a b P1(a cos, b sin) = 0 pointwise
    and projects onto a Fourier series of the given degree. Returns the series
    and the max deviation from the pointwise values on an offset grid, so a
    degree that is too small shows up as a large residual.
    """
    if samples is None:
        samples = max(256, 4 * degree + 4)
    if samples <= 2 * degree:
        raise DomainError(f"{samples} samples cannot resolve degree {degree}")

    def pointwise(phi):
        s, c = np.sin(phi), np.cos(phi)
        p = np.broadcast_to(np.asarray(P1(a * c, b * s), dtype=float), phi.shape)
        return -a * b * p / (2.0 * (a * a * s * s + b * b * c * c))

    phi = 2.0 * np.pi * np.arange(samples) / samples
    series = FourierSeries.fit(pointwise(phi), degree)
    check = phi + np.pi / samples
    residual = float(np.max(np.abs(series(check) - pointwise(check))))
    return series, residual


def table_from_dict(spec: dict) -> Table:
    """Build a table from the JSON table-spec schema."""
    if not isinstance(spec, dict):
        raise DomainError("table spec must be a JSON object")
    try:
        return _table_from_dict(spec)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"malformed table spec: {exc!r}") from exc


def _table_from_dict(spec: dict) -> Table:
    kind = spec.get("type")
    mu1 = FourierSeries.from_dict(spec.get("mu1", spec.get("r1", {})))
    eps = float(spec.get("eps", 0.0))
    if kind == "ellipse":
        return EllipseTable(float(spec["a"]), float(spec["b"]))
    if kind == "perturbed_ellipse":
        return PerturbedEllipseTable(EllipseTable(float(spec["a"]), float(spec["b"])), eps, mu1)
    if kind == "perturbed_circle":
        return PerturbedCircleTable(float(spec["r0"]), eps, mu1)
    raise DomainError(f"unknown table type {kind!r}")


def table_to_dict(table: Table) -> dict:
    if isinstance(table, EllipseTable):
        return {"type": "ellipse", "a": table.a, "b": table.b}
    if isinstance(table, PerturbedEllipseTable):
        return {
            "type": "perturbed_ellipse",
            "a": table.base.a,
            "b": table.base.b,
            "eps": table.eps,
            "mu1": table.mu1.to_dict(),
        }
    if isinstance(table, PerturbedCircleTable):
        return {"type": "perturbed_circle", "r0": table.r0, "eps": table.eps, "mu1": table.r1.to_dict()}
    raise DomainError(f"cannot serialize {type(table).__name__}")
