import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from billiard_caustics.billiard_map import PhasePoint, orbit, step, step_n
from billiard_caustics.caustics import (
    caustic_params,
    caustic_phase_point,
    ellipse_step,
    lambda_for_rotation,
    poncelet_polygon,
    resonance_report,
    resonant_lambda,
    tangency_invariant,
    tangency_lambda,
    write_polygon_csv,
)
from billiard_caustics.errors import DomainError
from billiard_caustics.tables import EllipseTable

A, B = 2.0, 1.0
E21 = EllipseTable(A, B)
RESONANCES = [(1, 3), (1, 4), (2, 5), (1, 5), (3, 7)]
STARTS = 2 * np.pi * np.arange(16) / 16 + 0.1


def test_invariants_of_params():
    p = caustic_params(A, B, 0.6)
    assert p.k ** 2 == pytest.approx((A * A - B * B) / (A * A - 0.36), rel=1e-14)
    assert 0 < p.delta < 2 * p.K
    assert 0 < p.rho < 0.5


def test_limits():
    # rho -> 1/2 only logarithmically in the gap b - lambda
    rho = [caustic_params(A, B, B - g).rho for g in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert np.all(np.diff(rho) > 0) and rho[-1] < 0.5
    gaps = 0.5 - np.array(rho)
    assert np.all(gaps[1:] / gaps[:-1] < 0.9)
    near_0 = caustic_params(A, B, 1e-9)
    assert near_0.delta < 1e-8 and near_0.rho < 1e-9


def test_circle_limit():
    for lam in (0.1, 0.5, 0.9):
        p = caustic_params(1.0, 1.0, lam)
        assert p.k == 0.0
        assert math.sin(p.delta / 2) == pytest.approx(lam, abs=1e-15)


@pytest.mark.parametrize("lam", [0.0, -0.2, 1.0, 1.5])
def test_lambda_domain(lam):
    with pytest.raises(DomainError):
        caustic_params(A, B, lam)


def test_rho_increasing():
    lam = np.linspace(1e-3, 1 - 1e-6, 200)
    rho = [caustic_params(A, B, x).rho for x in lam]
    assert np.all(np.diff(rho) > 0)


@pytest.mark.parametrize("m,n", [(1, 2), (2, 4), (3, 6), (0, 3), (2, 3)])
def test_resonance_arguments(m, n):
    with pytest.raises(DomainError):
        resonant_lambda(A, B, m, n)


def test_resonance_circle():
    p = resonant_lambda(1.0, 1.0, 1, 4)
    assert p.lam == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    p = resonant_lambda(1.7, 1.7, 2, 5)
    assert p.lam == pytest.approx(1.7 * math.sin(2 * math.pi / 5), abs=1e-15)


@pytest.mark.parametrize("m,n", RESONANCES)
def test_resonance_residual(m, n):
    p = resonant_lambda(A, B, m, n)
    assert p.resonance_residual <= 1e-12
    assert p.rho == pytest.approx(m / n, abs=1e-12)


def test_lambda_for_rotation_matches_resonance():
    p = lambda_for_rotation(A, B, 0.25)
    assert p.lam == pytest.approx(resonant_lambda(A, B, 1, 4).lam, abs=1e-12)
    assert p.lam == pytest.approx(2 / math.sqrt(5), abs=1e-12)


@pytest.mark.parametrize("m,n", RESONANCES)
def test_porism(m, n):
    p = resonant_lambda(A, B, m, n)
    for phi0 in STARTS:
        poly = poncelet_polygon(p, phi0)
        assert poly.closure_error() <= 1e-9
        assert poly.phi[-1] - poly.phi[0] == pytest.approx(2 * math.pi * m, abs=1e-9)


def test_polygon_circle_square():
    poly = poncelet_polygon(resonant_lambda(1.0, 1.0, 1, 4), 0.0)
    assert np.allclose(poly.phi, np.pi / 2 * np.arange(5), atol=1e-14)


@pytest.mark.parametrize("m,n", RESONANCES)
def test_chords_tangent_to_caustic(m, n):
    p = resonant_lambda(A, B, m, n)
    poly = poncelet_polygon(p, 0.7)
    v = poly.vertices()
    for j in range(n):
        d = v[j + 1] - v[j]
        lam = tangency_lambda(v[j], d / np.hypot(*d), A, B)
        assert lam == pytest.approx(p.lam, abs=1e-10)


@pytest.mark.parametrize("m,n", [(1, 4), (3, 8), (1, 6)])
def test_even_polygons_centrally_symmetric(m, n):
    poly = poncelet_polygon(resonant_lambda(A, B, m, n), 0.3)
    for j in range(n // 2):
        assert poly.phi[j + n // 2] - poly.phi[j] == pytest.approx(math.pi * m, abs=1e-10) or \
            math.remainder(poly.phi[j + n // 2] - poly.phi[j] - math.pi, 2 * math.pi) == pytest.approx(0, abs=1e-10)


def test_polygon_rejects_nonresonant():
    with pytest.raises(DomainError):
        poncelet_polygon(caustic_params(A, B, 0.5), 0.0)


def test_tangency_lambda_examples():
    assert tangency_lambda((A, 0.0), (-1.0, 0.0), A, B) == pytest.approx(B)
    assert tangency_lambda((0.0, B), (1.0, 0.0), A, B) == 0.0
    with pytest.raises(DomainError):
        tangency_lambda((A, 0.0), (1.0, 0.0), A, B)


def _impacts(table, phis):
    x, y = table.point(phis)
    return np.column_stack([x, y])


def test_tangency_invariant_along_orbit():
    lam = 0.6
    p0 = caustic_phase_point(caustic_params(A, B, lam), 0.4)
    phis, _ = orbit(E21, p0, 100)
    q = _impacts(E21, phis)
    vals = [tangency_invariant(q[j - 1], q[j], q[j + 1], A, B) for j in range(1, 100)]
    assert np.max(np.abs(np.array(vals) - 2 * lam)) <= 1e-9
    rev = [tangency_invariant(q[j + 1], q[j], q[j - 1], A, B) for j in range(1, 100)]
    assert np.allclose(rev, vals, atol=1e-15)


def test_tangency_invariant_circle():
    r0, delta = 1.3, 1.1
    ang = 0.2 + delta * np.arange(3)
    q = np.column_stack([r0 * np.cos(ang), r0 * np.sin(ang)])
    assert tangency_invariant(q[0], q[1], q[2], r0, r0) == pytest.approx(2 * r0 * math.sin(delta / 2), abs=1e-14)


def test_tangency_invariant_coincident():
    with pytest.raises(DomainError):
        tangency_invariant((A, 0.0), (A, 0.0), (0.0, B), A, B)


@pytest.mark.parametrize("m,n", RESONANCES)
def test_generic_map_closes_resonant_orbits(m, n):
    p = resonant_lambda(A, B, m, n)
    for phi0 in (0.3, 1.1, 3.9):
        start = caustic_phase_point(p, phi0)
        phis, _ = orbit(E21, start, n)
        assert phis[-1] - phis[0] == pytest.approx(2 * math.pi * m, abs=1e-8)
        end, w = step_n(E21, start, n)
        assert w == m
        assert math.remainder(end.phi - phi0, 2 * math.pi) == pytest.approx(0.0, abs=1e-8)
        assert end.theta == pytest.approx(start.theta, abs=1e-8)


def test_rigid_parameter_along_generic_orbit():
    p = caustic_params(A, B, 0.75)
    phis, _ = orbit(E21, caustic_phase_point(p, 2.0), 30)
    assert np.allclose(np.diff(p.t_of_phi(phis)), p.delta, atol=1e-10)


@settings(max_examples=40)
@given(st.floats(0.0, 2 * math.pi, exclude_max=True), st.floats(0.05, math.pi - 0.05))
def test_closed_form_step_matches_generic(phi, theta):
    p = PhasePoint(phi, theta)
    try:
        q = ellipse_step(A, B, p)
    except DomainError:
        return  # hyperbolic caustic
    r = step(E21, p)
    assert math.remainder(q.phi - r.phi, 2 * math.pi) == pytest.approx(0.0, abs=1e-10)
    assert q.theta == pytest.approx(r.theta, abs=1e-10)


def test_outputs():
    p = resonant_lambda(A, B, 1, 3)
    rep = resonance_report(p)
    assert set(rep) >= {"m", "n", "lambda", "k", "delta", "K", "rho_residual"}
    buf = io.StringIO()
    write_polygon_csv(poncelet_polygon(p, 0.0), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "j,t_j,phi_j,x_j,y_j" and len(lines) == 5
