"""Ball model of hyperbolic space H^{n+1}.

The space is the open unit ball in R^{n+1} with metric 4 dw^2 / (1-|w|^2)^2.
Geodesics that meet the boundary sphere orthogonally are parametrized by a
boundary point theta in S^n and a nonzero vector xi orthogonal to theta:

    gamma(t) = theta + (t*theta + xi) / (t^2 + |xi|^2),   t in (-inf, -1/2),

a circle tangent to the theta axis.  |gamma(t)|^2 = 1 + (1+2t)/(t^2+|xi|^2),
so the curve stays inside the ball for t < -1/2 and hits the sphere at
t = -1/2.  The speed of gamma with respect to the hyperbolic metric is
-2/(1+2t), which makes u = log(-(1+2t)) an arclength parameter.

Supported boundary dimensions are n in {1, 2, 3}; vectors live in R^{n+1}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError

SUPPORTED_DIMS = (1, 2, 3)

#: constructors renormalize/project inputs closer than this to the constraint
_REPAIR_TOL = 1e-9
#: invariants must hold to this accuracy after construction
_STRICT_TOL = 1e-12


def _check_dim(n: int) -> int:
    if n not in SUPPORTED_DIMS:
        raise ValidationError(f"boundary dimension n={n} not in {SUPPORTED_DIMS}")
    return int(n)


@dataclass(frozen=True)
class BallPoint:
    """A point of H^{n+1} in Euclidean ball coordinates, |w| < 1 strictly."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 1:
            raise ValidationError("BallPoint expects a 1-d coordinate vector")
        if not np.all(np.isfinite(w)):
            raise ValidationError("BallPoint coordinates must be finite")
        if np.linalg.norm(w) >= 1.0:
            raise DomainError(f"|w| = {np.linalg.norm(w)} is not < 1")
        object.__setattr__(self, "w", w)
        w.setflags(write=False)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.w))

    @classmethod
    def origin(cls, n: int) -> "BallPoint":
        return cls(np.zeros(_check_dim(n) + 1))


@dataclass(frozen=True)
class GeodesicChart:
    """Geodesic parameters (theta, xi): |theta| = 1, <xi, theta> = 0, xi != 0.

    Construction renormalizes theta and projects xi onto the orthogonal
    complement of theta when the defect is below 1e-9, and rejects larger
    defects.  Straight rays through the origin (xi = 0) are excluded.
    """

    theta: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        xi = np.asarray(self.xi, dtype=float)
        if theta.shape != xi.shape or theta.ndim != 1:
            raise ValidationError("theta and xi must be 1-d vectors of equal length")
        if theta.size - 1 not in SUPPORTED_DIMS:
            raise ValidationError(
                f"vectors of length {theta.size} do not match n in {SUPPORTED_DIMS}")
        tn = np.linalg.norm(theta)
        if abs(tn - 1.0) > _REPAIR_TOL:
            raise ValidationError(f"|theta| = {tn} deviates from 1 by more than 1e-9")
        theta = theta / tn
        proj = float(np.dot(xi, theta))
        if abs(proj) > _REPAIR_TOL * max(1.0, np.linalg.norm(xi)):
            raise ValidationError(
                f"<xi, theta> = {proj} exceeds the 1e-9 projection tolerance")
        xi = xi - proj * theta
        if np.linalg.norm(xi) == 0.0:
            raise ValidationError("xi = 0 rays are excluded from GeodesicChart")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "xi", xi)
        theta.setflags(write=False)
        xi.setflags(write=False)
        assert abs(np.linalg.norm(self.theta) - 1.0) <= _STRICT_TOL
        assert abs(np.dot(self.xi, self.theta)) <= _STRICT_TOL * max(1.0, self.xi_norm)

    @property
    def n(self) -> int:
        return self.theta.size - 1

    @property
    def xi_norm(self) -> float:
        return float(np.linalg.norm(self.xi))


@dataclass(frozen=True)
class SpectralParameter:
    """Energy bookkeeping: lambda > 0, h = 1/lambda, s = n/2 + i*lambda."""

    n: int
    lam: float
    h: float = field(init=False)
    s: complex = field(init=False)

    def __post_init__(self):
        _check_dim(self.n)
        if not (self.lam > 0.0 and np.isfinite(self.lam)):
            raise ValidationError(f"lambda must be a positive real, got {self.lam}")
        object.__setattr__(self, "h", 1.0 / self.lam)
        object.__setattr__(self, "s", self.n / 2.0 + 1j * self.lam)


def hyperbolic_distance(w: BallPoint | np.ndarray, w2: BallPoint | np.ndarray) -> float:
    """Distance arccosh(1 + 2|w-w2|^2 / ((1-|w|^2)(1-|w2|^2)))."""
    a = w.w if isinstance(w, BallPoint) else np.asarray(w, dtype=float)
    b = w2.w if isinstance(w2, BallPoint) else np.asarray(w2, dtype=float)
    na2, nb2 = np.dot(a, a), np.dot(b, b)
    if na2 >= 1.0 or nb2 >= 1.0:
        raise DomainError("hyperbolic_distance arguments must lie strictly inside the ball")
    q = 1.0 + 2.0 * np.dot(a - b, a - b) / ((1.0 - na2) * (1.0 - nb2))
    # q >= 1 up to rounding; clamp to keep arccosh real near coincident points
    return float(np.arccosh(max(q, 1.0)))


def distance_to_origin(w: BallPoint | np.ndarray) -> float:
    """rho(w) = log((1+|w|)/(1-|w|)); distance from the origin."""
    a = w.w if isinstance(w, BallPoint) else np.asarray(w, dtype=float)
    r = np.linalg.norm(a)
    if r >= 1.0:
        raise DomainError("point must lie strictly inside the ball")
    return float(np.log1p(r) - np.log1p(-r))


def boundary_defining_x(w: BallPoint | np.ndarray) -> float:
    """x(w) = (1-|w|)/(1+|w|) = exp(-rho(w)); vanishes on the sphere at infinity."""
    a = w.w if isinstance(w, BallPoint) else np.asarray(w, dtype=float)
    r = np.linalg.norm(a)
    if r >= 1.0:
        raise DomainError("point must lie strictly inside the ball")
    return float((1.0 - r) / (1.0 + r))


def _gamma_raw(t: np.ndarray, chart: GeodesicChart) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    denom = t * t + chart.xi_norm ** 2
    return chart.theta + (t[..., None] * chart.theta + chart.xi) / denom[..., None]


def geodesic_point(t: float | np.ndarray, chart: GeodesicChart) -> np.ndarray:
    """gamma(t) = theta + (t*theta + xi)/(t^2 + |xi|^2) for t < -1/2."""
    t = np.asarray(t, dtype=float)
    if np.any(t >= -0.5):
        raise DomainError("geodesic_point requires t < -1/2 (interior segment)")
    return _gamma_raw(t, chart)


def geodesic_speed(t: float | np.ndarray, chart: GeodesicChart) -> np.ndarray | float:
    """Hyperbolic speed |d gamma/dt|_g = -2/(1+2t), diverging as t -> -1/2."""
    t = np.asarray(t, dtype=float)
    if np.any(t >= -0.5):
        raise DomainError("geodesic_speed requires t < -1/2")
    out = -2.0 / (1.0 + 2.0 * t)
    return float(out) if out.ndim == 0 else out


def geodesic_closest_approach(chart: GeodesicChart) -> float:
    """Distance from the origin to the geodesic: arcsinh(2 |xi|)."""
    return float(np.arcsinh(2.0 * chart.xi_norm))


def boundary_endpoint(chart: GeodesicChart) -> np.ndarray:
    """Limit point gamma(-1/2) on the sphere (the second boundary endpoint)."""
    denom = 0.25 + chart.xi_norm ** 2
    return chart.theta + (-0.5 * chart.theta + chart.xi) / denom


def scattering_relation(chart: GeodesicChart) -> tuple[np.ndarray, np.ndarray]:
    """Map (theta, xi) to (theta2, xi2) along the geodesic.

    theta2 = gamma(-1/2, xi, theta) is the exit point on S^n; xi2 is the
    unique vector orthogonal to theta2 with gamma(-1/2, -xi2, theta2) = theta.
    Writing q = <theta, theta2>, the solution is closed-form:
    xi2 = (q*theta2 - theta) / (2(1-q)).
    """
    theta2 = boundary_endpoint(chart)
    theta2 = theta2 / np.linalg.norm(theta2)
    q = float(np.dot(chart.theta, theta2))
    c = 0.5 / (1.0 - q)
    xi2 = c * (q * theta2 - chart.theta)
    return theta2, xi2
