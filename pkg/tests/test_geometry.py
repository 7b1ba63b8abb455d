import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import least_squares

from hypershift.errors import DomainError, ValidationError
from hypershift.geometry import (BallPoint, GeodesicChart, SpectralParameter,
                                 boundary_defining_x, boundary_endpoint,
                                 distance_to_origin, geodesic_point,
                                 geodesic_speed, hyperbolic_distance,
                                 scattering_relation)


def random_chart(rng, n, xi_norm=None):
    theta = rng.normal(size=n + 1)
    theta /= np.linalg.norm(theta)
    e = rng.normal(size=n + 1)
    e -= e @ theta * theta
    e /= np.linalg.norm(e)
    return GeodesicChart(theta, (xi_norm or (0.1 + 3 * rng.random())) * e)


# ------------------------------------------------------------------ distance

def test_distance_identity_and_log3():
    z = np.zeros(2)
    assert hyperbolic_distance(z, z) == 0.0
    d = hyperbolic_distance(np.array([0.5, 0.0]), z)
    assert abs(d - np.log(3.0)) < 1e-14


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_distance_cosh_identity_random(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    a = rng.normal(size=n + 1)
    a *= rng.random() * 0.95 / np.linalg.norm(a)
    b = rng.normal(size=n + 1)
    b *= rng.random() * 0.95 / np.linalg.norm(b)
    lhs = np.cosh(hyperbolic_distance(a, b))
    rhs = 1.0 + 2.0 * np.dot(a - b, a - b) / ((1 - a @ a) * (1 - b @ b))
    assert abs(lhs - rhs) < 1e-12 * max(1.0, rhs)
    assert abs(hyperbolic_distance(a, b) - hyperbolic_distance(b, a)) < 1e-14


def test_distance_domain_errors():
    with pytest.raises(DomainError):
        hyperbolic_distance(np.array([1.0, 0.0]), np.zeros(2))
    with pytest.raises(DomainError):
        BallPoint(np.array([0.8, 0.8]))


def test_distance_to_origin_closed_form(rng):
    for _ in range(20):
        w = rng.normal(size=3)
        w *= rng.random() * 0.99 / np.linalg.norm(w)
        r = np.linalg.norm(w)
        assert abs(distance_to_origin(w) - np.log((1 + r) / (1 - r))) < 1e-12
        # x(w) = exp(-rho(w))
        assert abs(boundary_defining_x(w) - np.exp(-distance_to_origin(w))) < 1e-12


# ------------------------------------------------------------------ geodesics

def test_geodesic_point_limits_and_norm(rng):
    chart = GeodesicChart(np.array([1.0, 0.0]), np.array([0.0, 0.7]))
    p = geodesic_point(-1e6, chart)
    assert np.linalg.norm(p - chart.theta) < 1e-5
    ts = -0.5 - np.geomspace(1e-3, 1e3, 41)
    pts = geodesic_point(ts, chart)
    norms2 = np.sum(pts * pts, axis=1)
    expected = 1.0 + (1.0 + 2.0 * ts) / (ts ** 2 + chart.xi_norm ** 2)
    assert np.max(np.abs(norms2 - expected)) < 1e-14
    assert np.all(norms2 < 1.0)
    with pytest.raises(DomainError):
        geodesic_point(-0.5, chart)


def test_boundary_endpoint_example():
    chart = GeodesicChart(np.array([1.0, 0.0]), np.array([0.0, 0.5]))
    assert np.allclose(boundary_endpoint(chart), [0.0, 1.0], atol=1e-15)


def test_geodesic_speed_examples_and_fd(rng):
    chart = random_chart(rng, 2)
    assert geodesic_speed(-1.0, chart) == 2.0
    for t in (-0.7, -2.0, -40.0):
        h = 1e-6 * max(1.0, abs(t))
        dgam = (geodesic_point(t + h, chart) - geodesic_point(t - h, chart)) / (2 * h)
        g = geodesic_point(t, chart)
        speed_fd = 2.0 / (1.0 - g @ g) * np.linalg.norm(dgam)
        assert abs(speed_fd - geodesic_speed(t, chart)) < 1e-8 * geodesic_speed(t, chart)
    ts = -0.5 - np.geomspace(1e-6, 1e6, 50)
    assert np.all(geodesic_speed(ts, chart) > 0)


def test_speed_integrates_metric(rng):
    chart = random_chart(rng, 1)
    t1, t2 = -5.0, -0.8
    arc, _ = quad(lambda t: geodesic_speed(t, chart), t1, t2, epsabs=1e-12)
    d = hyperbolic_distance(geodesic_point(t1, chart), geodesic_point(t2, chart))
    assert abs(arc - d) < 1e-8


# --------------------------------------------------------- scattering relation

def test_scattering_relation_example():
    chart = GeodesicChart(np.array([1.0, 0.0]), np.array([0.0, 0.5]))
    theta2, xi2 = scattering_relation(chart)
    assert np.allclose(theta2, [0.0, 1.0], atol=1e-14)
    # defining property: the geodesic from theta2 with -xi2 exits at theta
    back = boundary_endpoint(GeodesicChart(theta2, -xi2))
    assert np.allclose(back, chart.theta, atol=1e-12)


def test_scattering_relation_random_roundtrip(rng):
    for _ in range(25):
        n = int(rng.integers(1, 4))
        chart = random_chart(rng, n)
        theta2, xi2 = scattering_relation(chart)
        assert abs(np.linalg.norm(theta2) - 1.0) < 1e-12
        assert abs(theta2 @ xi2) < 1e-12 * max(1.0, np.linalg.norm(xi2))
        back = boundary_endpoint(GeodesicChart(theta2, -xi2))
        assert np.linalg.norm(back - chart.theta) < 1e-10


def test_scattering_relation_against_numerical_solve(rng):
    """Independent oracle: solve for xi2 numerically, compare closed form."""
    chart = random_chart(rng, 2, xi_norm=0.9)
    theta2, xi2 = scattering_relation(chart)

    def residual(x):
        cand = GeodesicChart(theta2, x - (x @ theta2) * theta2)
        return np.concatenate([boundary_endpoint(GeodesicChart(theta2, -cand.xi))
                               - chart.theta, [x @ theta2]])

    sol = least_squares(residual, xi2 + 0.1, xtol=1e-15, ftol=1e-15)
    xi2_num = sol.x - (sol.x @ theta2) * theta2
    assert np.linalg.norm(xi2_num - xi2) < 1e-8


# ------------------------------------------------------------------ data types

def test_chart_repair_and_reject():
    theta = np.array([1.0 + 5e-10, 0.0])
    xi = np.array([3e-10, 1.0])
    chart = GeodesicChart(theta, xi)
    assert abs(np.linalg.norm(chart.theta) - 1.0) < 1e-15
    assert abs(chart.theta @ chart.xi) < 1e-12
    with pytest.raises(ValidationError):
        GeodesicChart(np.array([1.1, 0.0]), np.array([0.0, 1.0]))
    with pytest.raises(ValidationError):
        GeodesicChart(np.array([1.0, 0.0]), np.array([0.5, 1.0]))
    with pytest.raises(ValidationError):
        GeodesicChart(np.array([1.0, 0.0]), np.array([0.0, 0.0]))


def test_spectral_parameter():
    sp = SpectralParameter(n=2, lam=50.0)
    assert sp.h == 1.0 / 50.0
    assert sp.s == 1.0 + 50.0j
    with pytest.raises(ValidationError):
        SpectralParameter(n=2, lam=-1.0)
    with pytest.raises(ValidationError):
        SpectralParameter(n=5, lam=1.0)
