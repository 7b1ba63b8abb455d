"""Inverse problem: measure -> monotone profile -> radial potential.

For a strictly monotone decreasing profile G the limiting measure determines
G exactly through its distribution function: the super-level set
{xi : G(|xi|) > alpha} is the ball of radius G^{-1}(alpha), so

    r(alpha) = [ nu(alpha, inf) / (vol(S^n) vol(B^n)) ]^{1/n}

inverts the pushforward without optimization.  The second step solves the
linear forward map V -> G_V for V by collocation in a cubic B-spline basis
with optional Tikhonov regularization; the forward matrix columns are
exact profile transforms of the basis elements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from .errors import IllConditionedError, ValidationError
from .potentials import RadialPotential
from .xray import ClassicalProfile, ball_volume, sphere_volume, xray_radial_profile

__all__ = [
    "MonotoneProfile",
    "profile_from_measure",
    "potential_from_profile",
    "profile_to_classical",
]


@dataclass(frozen=True)
class MonotoneProfile:
    """Nonincreasing profile samples with strict decrease where nonzero."""

    r_grid: np.ndarray
    g_values: np.ndarray
    g0: float
    support_radius: float  # math.inf for profiles positive on the whole line

    def __post_init__(self):
        r = np.asarray(self.r_grid, dtype=float)
        g = np.asarray(self.g_values, dtype=float)
        if r.ndim != 1 or r.shape != g.shape or r.size < 2:
            raise ValidationError("MonotoneProfile needs matching 1-d arrays")
        if np.any(np.diff(r) <= 0):
            raise ValidationError("r_grid must increase strictly")
        live = np.abs(g) > 1e-12
        if np.any(np.diff(g)[live[:-1] & live[1:]] >= 0):
            raise ValidationError("profile must decrease strictly where above 1e-12")
        object.__setattr__(self, "r_grid", r)
        object.__setattr__(self, "g_values", g)


def profile_from_measure(nu_distribution, n: int, value_grid) -> MonotoneProfile:
    """Recover a strictly monotone G from its pushforward measure.

    ``nu_distribution(alpha, beta)`` must return the measure of
    {(theta, xi): G(|xi|) in (alpha, beta)}; only masses of (alpha, inf) are
    queried.  ``value_grid`` lists the levels alpha > 0 to invert at.
    """
    alphas = np.asarray(sorted(float(a) for a in value_grid), dtype=float)
    if alphas.size == 0 or alphas[0] <= 0:
        raise ValidationError("value_grid must contain positive levels")
    denom = sphere_volume(n) * ball_volume(n)
    masses = np.array([float(nu_distribution(a, math.inf)) for a in alphas])
    if np.any(masses < 0):
        raise ValidationError("measure returned a negative mass")
    radii = (masses / denom) ** (1.0 / n)
    if np.any(np.diff(radii) > 1e-12 * max(1.0, radii.max())):
        raise ValidationError("recovered radii are not decreasing in the level: "
                              "the measure is not the pushforward of a monotone profile")
    order = np.argsort(radii)
    r = radii[order]
    g = alphas[order]  # G(r(alpha)) = alpha, sorted by increasing radius
    keep = np.concatenate([[True], np.diff(r) > 0])
    return MonotoneProfile(r_grid=r[keep], g_values=g[keep],
                           g0=float(alphas.max()),
                           support_radius=float(r.max()))


def profile_to_classical(profile: MonotoneProfile,
                         tail_exponent: float = math.inf) -> ClassicalProfile:
    """View a monotone profile as a ClassicalProfile (for nu-integrals, CSV)."""
    return ClassicalProfile(profile.r_grid, profile.g_values, True, tail_exponent)


def _bspline_basis(rho_grid: np.ndarray):
    """Cubic B-spline basis on the knot vector built from rho_grid."""
    knots = np.concatenate([[rho_grid[0]] * 3, rho_grid, [rho_grid[-1]] * 3])
    n_basis = len(knots) - 4
    elements = []
    for i in range(n_basis):
        c = np.zeros(n_basis)
        c[i] = 1.0
        elements.append(BSpline(knots, c, 3, extrapolate=False))
    return elements


def _basis_potential(b: BSpline, rho_max: float) -> RadialPotential:
    def prof(rho):
        rho = np.asarray(rho, dtype=float)
        out = b(np.clip(rho, 0.0, rho_max))
        out = np.nan_to_num(out, nan=0.0)
        return np.where(rho <= rho_max, out, 0.0)

    return RadialPotential(profile=prof, decay_exponent=math.inf,
                           family_tag="spline_basis",
                           _envelope=lambda a: 1.0 if a < rho_max else 0.0,
                           _tail_integral=lambda a: max(rho_max - a, 0.0))


def potential_from_profile(profile, n: int, rho_grid, reg: float = 0.0,
                           tol: float = 1e-9) -> RadialPotential:
    """Solve the linear system G = (forward transform) V for V by collocation.

    ``profile`` is a MonotoneProfile or ClassicalProfile sampled on its
    radius grid; ``rho_grid`` carries the spline knots for V.  With reg > 0
    the least-squares system is Tikhonov regularized; with reg = 0 an
    ill-conditioning error is raised when the condition estimate exceeds 1e12.
    """
    rho_grid = np.asarray(rho_grid, dtype=float)
    if rho_grid.ndim != 1 or rho_grid.size < 4 or np.any(np.diff(rho_grid) <= 0):
        raise ValidationError("rho_grid must be an increasing grid with >= 4 knots")
    if reg < 0:
        raise ValidationError("reg must be nonnegative")
    r_data = np.asarray(profile.r_grid, dtype=float)
    g_data = np.asarray(profile.g_values, dtype=float)
    rho_max = float(rho_grid[-1])
    basis = _bspline_basis(rho_grid)
    cols = []
    for b in basis:
        bp = _basis_potential(b, rho_max)
        cols.append(xray_radial_profile(bp, r_data, tol=tol).g_values)
    A = np.column_stack(cols)
    sv = np.linalg.svd(A, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if reg == 0.0 and cond > 1e12:
        raise IllConditionedError(
            f"forward matrix condition estimate {cond:.2e} exceeds 1e12; "
            "pass reg > 0")
    if reg > 0.0:
        A_aug = np.vstack([A, math.sqrt(reg) * np.eye(A.shape[1])])
        y_aug = np.concatenate([g_data, np.zeros(A.shape[1])])
    else:
        A_aug, y_aug = A, g_data
    coef, *_ = np.linalg.lstsq(A_aug, y_aug, rcond=None)
    knots = np.concatenate([[rho_grid[0]] * 3, rho_grid, [rho_grid[-1]] * 3])
    spline = BSpline(knots, coef, 3, extrapolate=False)

    def prof(rho):
        rho = np.asarray(rho, dtype=float)
        out = np.nan_to_num(spline(np.clip(rho, 0.0, rho_max)), nan=0.0)
        return np.where(rho <= rho_max, out, 0.0)

    vals = prof(np.linspace(0.0, rho_max, 4 * rho_grid.size))
    fd = np.diff(vals)
    live = np.abs(vals[:-1]) > 1e-6
    mono = 0
    if np.all(fd[live] >= -1e-9):
        mono = 1
    elif np.all(fd[live] <= 1e-9):
        mono = -1
    return RadialPotential(
        profile=prof,
        decay_exponent=math.inf,
        family_tag="reconstructed",
        params={"reg": reg, "condition": cond, "n_basis": len(basis)},
        monotone=mono,
        _envelope=lambda a: float(np.max(np.abs(prof(np.linspace(min(a, rho_max),
                                                                 rho_max, 256)))))
        if a < rho_max else 0.0,
        _tail_integral=lambda a: float(np.trapezoid(
            np.abs(prof(np.linspace(min(a, rho_max), rho_max, 512))),
            np.linspace(min(a, rho_max), rho_max, 512))) if a < rho_max else 0.0,
    )
