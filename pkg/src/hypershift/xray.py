"""Geodesic X-ray transform and the classical profile / limiting measure.

The transform of a potential U along the geodesic (theta, xi) is the
arclength integral

    X(U)(xi, theta) = int U(gamma(t)) ds
                    = - int_{-inf}^{-1/2} U(gamma(t)) 2/(1+2t) dt.

The substitution u = log(-(1+2t)) (u is an arclength parameter running
backwards along t) turns this into int_R U(gamma(t(u))) du with
t(u) = -(1+e^u)/2, removing the 1/(1+2t) singularity exactly; the integrand
then decays like the potential does in the distance to the origin, and the
trapezoid rule on a uniform u-grid is spectrally accurate.

The radial classical profile is normalized as

    G_V(r) = -(1/2) X(V)(xi, theta) at |xi| = r/2,

the high-energy limit of lambda times the relative phase shifts under the
quantization |xi| <-> k/lambda.  The limiting measure nu is the pushforward
of the Lebesgue measure of S^n x R^n under (theta, xi) -> G_V(|xi|).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .errors import ToleranceError, ValidationError
from .geometry import GeodesicChart
from .potentials import AmbientPotential, RadialPotential, radial_to_ambient

__all__ = [
    "xray_general",
    "xray_radial_profile",
    "ClassicalProfile",
    "classical_nu_integral",
    "sphere_volume",
    "ball_volume",
    "PROFILE_NORMALIZATION",
]

#: G_V(r) = PROFILE_NORMALIZATION * X(V) at |xi| = r/2
PROFILE_NORMALIZATION = -0.5

_U_SPAN_CAP = 350.0
_MAX_REFINE = 14


def sphere_volume(n: int) -> float:
    """Surface measure of the unit sphere S^n in R^{n+1}."""
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


def ball_volume(n: int) -> float:
    """Lebesgue measure of the unit ball B^n in R^n."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


def _closest_approach(sigma: float) -> tuple[float, float]:
    """(u0, rho_min): arclength center and distance of closest approach."""
    u0 = 0.5 * math.log1p(4.0 * sigma * sigma)
    rho_min = math.asinh(2.0 * sigma)
    return u0, rho_min


def _rho_on_geodesic(u: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Distance to the origin along the geodesic, stable for large |u|.

    With t = -(1+e^u)/2 and B = e^u/(t^2+sigma^2) = 1 - A^2 one has
    rho = 2 log(1+A) - log B.
    """
    t = -(1.0 + np.exp(u)) / 2.0
    denom = t * t + sigma * sigma
    B = np.exp(u) / denom
    A = np.sqrt(np.maximum(1.0 - B, 0.0))
    return 2.0 * np.log1p(A) - np.log(B)


def _tail_halfwidth(pot, rho_min: float, tol: float, ambient_dim: int = 2) -> float:
    """Half-width U with  2 * int_{|u-u0|>U} |V(gamma)| du <= tol/2.

    Uses rho(gamma(u0+x)) >= |x| - rho_min and the potential's certified
    tail integral.
    """
    target = tol / 4.0
    if isinstance(pot, RadialPotential):
        tail = pot.tail_integral
    else:
        if pot.support_radius_delta is not None:
            delta = pot.support_radius_delta
            rho_supp = math.log((2.0 - delta) / delta)
            return rho_min + rho_supp + 1e-9
        m = pot.decay_exponent
        if not m > 1.0:
            raise ToleranceError(
                "cannot certify the quadrature tail: ambient potential needs "
                "decay exponent m > 1 or a declared support radius")
        # |V(w)| <= N e^{-m rho}; probe a radial ray for N (weighted-norm bound)
        probe_r = np.tanh(np.linspace(0.0, 12.0, 400) / 2.0)
        e0 = np.zeros((probe_r.size, ambient_dim))
        e0[:, 0] = probe_r
        rho_probe = np.log1p(probe_r) - np.log1p(-probe_r)
        with np.errstate(over="ignore"):
            N = float(np.max(np.abs(pot(e0)) * np.exp(m * rho_probe)))
        N = max(N, 1e-300)

        def tail(a):
            return N / m * math.exp(-m * a)

    a = 0.0
    while tail(a) > target:
        a += 0.5
        if rho_min + a > _U_SPAN_CAP:
            raise ToleranceError(
                f"quadrature tail cannot be certified below {tol} within the span cap")
    return rho_min + a


def _ambient_values(pot: AmbientPotential, u: np.ndarray, chart: GeodesicChart) -> np.ndarray:
    t = -(1.0 + np.exp(u)) / 2.0
    denom = t * t + chart.xi_norm ** 2
    pts = chart.theta + (t[:, None] * chart.theta + chart.xi) / denom[:, None]
    return pot(pts)


def xray_general(pot, chart: GeodesicChart, tol: float = 1e-10) -> float:
    """X-ray transform X(V)(xi, theta) along the chart's geodesic.

    Accepts ambient or radial potentials (radial profiles are sampled through
    the distance function directly).  Absolute error certified below ``tol``
    by the potential's tail bound plus step-halving convergence.
    """
    sigma = chart.xi_norm
    u0, rho_min = _closest_approach(sigma)
    if isinstance(pot, AmbientPotential) and pot.support_radius_delta is not None:
        delta = pot.support_radius_delta
        if rho_min > math.log((2.0 - delta) / delta):
            return 0.0  # geodesic misses the support entirely
    if isinstance(pot, RadialPotential):
        def values(u):
            return pot(_rho_on_geodesic(u, np.asarray(sigma)))
    else:
        def values(u):
            return _ambient_values(pot, u, chart)

    U = _tail_halfwidth(pot, rho_min, tol, ambient_dim=chart.theta.size)
    return _trapezoid_refine(values, u0, U, tol)


def _trapezoid_refine(values, u0: float, U: float, tol: float) -> float:
    du = 0.125
    u = u0 + np.arange(-U, U + du, du)
    prev = float(np.trapezoid(values(u), dx=du))
    for _ in range(_MAX_REFINE):
        du *= 0.5
        u = u0 + np.arange(-U, U + du, du)
        cur = float(np.trapezoid(values(u), dx=du))
        if abs(cur - prev) <= max(tol / 2.0, 8e-16 * abs(cur)):
            return cur
        prev = cur
    raise ToleranceError(f"u-grid refinement did not reach tol={tol}")


@dataclass(frozen=True)
class ClassicalProfile:
    """Sampled classical profile G_V on an increasing radius grid.

    ``tail_exponent`` is the declared decay rate (may be inf); ``bound_C``
    is the fitted constant with |G(r)| <= C (1+r)^{-m_eff} on the grid,
    recorded for diagnostics.
    """

    r_grid: np.ndarray
    g_values: np.ndarray
    monotone_decreasing: bool
    tail_exponent: float
    bound_C: float = field(default=0.0)

    def __post_init__(self):
        r = np.asarray(self.r_grid, dtype=float)
        g = np.asarray(self.g_values, dtype=float)
        if r.ndim != 1 or r.shape != g.shape or r.size < 2:
            raise ValidationError("profile needs matching 1-d grids with >= 2 points")
        if np.any(r < 0) or np.any(np.diff(r) <= 0):
            raise ValidationError("r_grid must be nonnegative and strictly increasing")
        if self.monotone_decreasing and np.any(np.diff(g) > 1e-10):
            raise ValidationError("profile flagged monotone but g_values increase")
        object.__setattr__(self, "r_grid", r)
        object.__setattr__(self, "g_values", g)
        r.setflags(write=False)
        g.setflags(write=False)
        m_eff = min(self.tail_exponent, 8.0)
        C = float(np.max(np.abs(g) * (1.0 + r) ** m_eff)) if r.size else 0.0
        object.__setattr__(self, "bound_C", C)

    def interpolator(self):
        """Cubic interpolant on the grid; zero beyond the last radius."""
        spline = CubicSpline(self.r_grid, self.g_values)
        r_max = float(self.r_grid[-1])

        def g_of_r(r):
            r = np.asarray(r, dtype=float)
            return np.where(r <= r_max, spline(np.minimum(r, r_max)), 0.0)

        return g_of_r

    def support_radius(self, threshold: float) -> float:
        """Largest grid radius at which |G| still exceeds threshold."""
        above = np.nonzero(np.abs(self.g_values) > threshold)[0]
        if above.size == 0:
            return 0.0
        return float(self.r_grid[min(above[-1] + 1, self.r_grid.size - 1)])

    def to_csv(self, fh) -> None:
        fh.write("r,G\n")
        for r, g in zip(self.r_grid, self.g_values):
            fh.write(f"{r:.17g},{g:.17g}\n")

    @classmethod
    def from_csv(cls, fh, tail_exponent: float = math.inf) -> "ClassicalProfile":
        header = fh.readline().strip()
        if header.replace(" ", "") != "r,G":
            raise ValidationError("profile CSV must start with header 'r,G'")
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
        g = rows[:, 1]
        mono = bool(np.all(np.diff(g) <= 1e-10))
        return cls(rows[:, 0], g, mono, tail_exponent)


def xray_radial_profile(pot: RadialPotential, r_grid, tol: float = 1e-10) -> ClassicalProfile:
    """Classical profile G_V(r) = -(1/2) X(V) at |xi| = r/2 on a radius grid."""
    if not isinstance(pot, RadialPotential):
        raise ValidationError("xray_radial_profile expects a RadialPotential")
    r = np.asarray(r_grid, dtype=float)
    if r.ndim != 1 or r.size == 0 or np.any(r < 0) or np.any(np.diff(r) <= 0):
        raise ValidationError("r_grid must be 1-d, nonnegative and strictly increasing")
    sigma = r / 2.0
    u0 = 0.5 * np.log1p(4.0 * sigma * sigma)
    rho_min_max = math.asinh(2.0 * float(sigma[-1]))
    U = _tail_halfwidth(pot, rho_min_max, tol)

    def total(du):
        urel = np.arange(-U, U + du, du)
        u = u0[:, None] + urel[None, :]
        vals = pot(_rho_on_geodesic(u, sigma[:, None]))
        return PROFILE_NORMALIZATION * np.trapezoid(vals, dx=du, axis=1)

    du = 0.125
    prev = total(du)
    for _ in range(_MAX_REFINE):
        du *= 0.5
        cur = total(du)
        if np.max(np.abs(cur - prev)) <= max(tol / 2.0, 8e-16 * np.max(np.abs(cur))):
            break
        prev = cur
    else:
        raise ToleranceError(f"u-grid refinement did not reach tol={tol}")

    mono = bool(np.all(np.diff(cur) <= 1e-10))
    return ClassicalProfile(r, cur, mono and pot.monotone >= 0, pot.decay_exponent)


def classical_nu_integral(profile: ClassicalProfile, f, n: int, tol: float = 1e-8,
                          p: int = 1) -> float:
    """Pairing of the limiting measure with f:

        int_{S^n} int_{R^n} f(G(|xi|)) d xi d theta
      = vol(S^n) vol(S^{n-1}) int_0^inf f(G(r)) r^{n-1} dr.

    ``p`` declares the vanishing order of f at 0 used for the tail bound
    (f(t)/t^p must stay bounded near the profile's small values).
    """
    g = profile.interpolator()
    r_max = float(profile.r_grid[-1])
    g_end = abs(float(profile.g_values[-1]))
    if abs(f(0.0)) > 1e-300:
        raise ValidationError(
            "f(0) != 0 makes the pairing non-integrable over the xi-plane")
    pref = sphere_volume(n) * sphere_volume(n - 1)

    def integrand(r):
        return f(float(g(r))) * r ** (n - 1)

    val, err = quad(integrand, 0.0, r_max, limit=400,
                    epsabs=tol / max(pref, 1.0), epsrel=1e-12)
    # tail bound beyond the grid from the profile's fitted decay
    tail = 0.0
    if g_end > 0.0:
        gv = np.abs(profile.g_values)
        live = gv > max(gv.max() * 1e-13, 1e-280)
        idx = np.nonzero(live)[0]
        k0 = idx[max(0, idx.size - 8)]
        with np.errstate(divide="ignore"):
            slope = -(np.log(gv[idx[-1]]) - np.log(gv[k0])) / (
                np.log1p(profile.r_grid[idx[-1]]) - np.log1p(profile.r_grid[k0]))
        scale = max(abs(float(f(g_end))), abs(g_end) ** p)
        if slope * p <= n:
            raise ToleranceError(
                "profile grid too short to certify the nu-integral tail")
        tail = pref * scale * r_max ** n / (slope * p - n)
    if tail > tol:
        raise ToleranceError(
            f"nu-integral tail bound {tail:.3e} exceeds tol; extend the r grid")
    if err * pref > 10.0 * tol:
        warnings.warn(f"nu-integral quadrature error estimate {err * pref:.2e} "
                      f"above tol={tol}", stacklevel=2)
    return float(pref * val + 0.0)
