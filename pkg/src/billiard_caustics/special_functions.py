"""Real elliptic integrals of the first kind and Jacobi amplitude, sn, cn.

Everything here takes a scalar modulus ``k`` and a scalar or array argument.
K and F are evaluated through the descending Landen (Gauss/AGM)
transformation; ``am`` inverts F by a bracketed Newton iteration.

Near k = 1 the complementary modulus k' = sqrt(1 - k^2) carries the
information. Callers that know k' to full relative precision can pass it as
``kc`` instead of letting it be recomputed from a rounded k.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError

MAX_MODULUS = 1.0 - 1e-9

_AM_TOL = 1e-13
_AM_MAXITER = 50


def check_modulus(k: float, kc: float | None = None) -> tuple[float, float]:
    """Validate k and return (k, k')."""
    k = float(k)
    if not (0.0 <= k < MAX_MODULUS):
        raise DomainError(f"modulus k={k!r} outside [0, 1 - 1e-9)")
    if kc is None:
        kc = math.sqrt((1.0 - k) * (1.0 + k))
    else:
        kc = float(kc)
        if not (0.0 < kc <= 1.0) or abs(k * k + kc * kc - 1.0) > 1e-12:
            raise DomainError(f"complementary modulus {kc!r} inconsistent with k={k!r}")
    return k, kc


@lru_cache(maxsize=4096)
def _complete_K(k: float, kc: float) -> float:
    # descending Landen: k_{j+1} = (1 - k'_j)/(1 + k'_j), k'_{j+1} = 2 sqrt(k'_j)/(1 + k'_j),
    # K(k_j) = (1 + k_{j+1}) K(k_{j+1}), K(0) = pi/2
    result = math.pi / 2
    while k > 1e-17:
        k = k * k / (1.0 + kc) ** 2
        kc = 2.0 * math.sqrt(kc) / (1.0 + kc)
        result *= 1.0 + k
    return result


def complete_K(k: float, kc: float | None = None) -> float:
    """Complete elliptic integral of the first kind K(k), 0 <= k < 1."""
    return _complete_K(*check_modulus(k, kc))


@lru_cache(maxsize=4096)
def _agm_table(kc: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    a, b = 1.0, kc
    aa, bb = [a], [b]
    # quadratic convergence: one step past 1e-10 lands below roundoff
    done = False
    while not done:
        done = abs(a - b) <= 1e-10 * a
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        aa.append(a)
        bb.append(b)
        if len(aa) > 64:
            raise ConvergenceError("AGM sequence did not converge")
    return tuple(aa), tuple(bb)


def _F_reduced(s, kc: float):
    """F on |s| <= pi/2 by the Gauss transformation of the amplitude."""
    aa, bb = _agm_table(kc)
    phi = np.asarray(s, dtype=float)
    for a, b in zip(aa[:-1], bb[:-1]):
        j = np.round(phi / math.pi)
        r = phi - j * math.pi
        # cos(r) >= 0, so atan2 picks the branch with phi_next ~ 2 phi
        phi = phi + j * math.pi + np.arctan2((b / a) * np.sin(r), np.cos(r))
    n = len(aa) - 1
    return phi / (2.0**n * aa[-1])


def incomplete_F(phi, k: float, kc: float | None = None):
    """Incomplete integral F(phi, k) = int_0^phi (1 - k^2 sin^2)^(-1/2).

    Any real ``phi`` is accepted; F(phi + pi) = F(phi) + 2K.
    """
    k, kc = check_modulus(k, kc)
    phi_arr = np.asarray(phi, dtype=float)
    j = np.round(phi_arr / math.pi)
    s = phi_arr - j * math.pi
    out = 2.0 * j * _complete_K(k, kc) + _F_reduced(s, kc)
    return float(out) if np.ndim(out) == 0 else out


def am(t, k: float, kc: float | None = None):
    """Jacobi amplitude, the inverse of ``incomplete_F`` in its angle."""
    k, kc = check_modulus(k, kc)
    K = _complete_K(k, kc)
    t_arr = np.asarray(t, dtype=float)
    j = np.round(t_arr / (2.0 * K))
    s = t_arr - 2.0 * j * K
    if k == 0.0:
        out = j * math.pi + s
        return float(out) if np.ndim(out) == 0 else out

    lo = np.full_like(s, -math.pi / 2)
    hi = np.full_like(s, math.pi / 2)
    phi = np.clip(0.5 * math.pi * s / K, lo, hi)
    kc2, k2 = kc * kc, k * k
    for _ in range(_AM_MAXITER):
        resid = _F_reduced(phi, kc) - s
        hi = np.where(resid > 0, phi, hi)
        lo = np.where(resid <= 0, phi, lo)
        # 1 - k^2 sin^2 written without cancellation near k = 1
        new = phi - resid * np.sqrt(kc2 + k2 * np.cos(phi) ** 2)
        outside = (new < lo) | (new > hi)
        new = np.where(outside, 0.5 * (lo + hi), new)
        new = np.where(resid == 0, phi, new)
        step = np.max(np.abs(new - phi), initial=0.0)
        phi = new
        if step <= _AM_TOL:
            break
    else:
        raise ConvergenceError(f"am(t, k={k}) did not converge in {_AM_MAXITER} iterations")
    out = j * math.pi + phi
    return float(out) if np.ndim(out) == 0 else out


def sn(t, k: float, kc: float | None = None):
    return np.sin(am(t, k, kc))


def cn(t, k: float, kc: float | None = None):
    return np.cos(am(t, k, kc))
