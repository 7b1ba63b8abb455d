"""Potential representations and decay bookkeeping.

Potentials are real valued.  Radial potentials are functions of the geodesic
distance rho to the origin; ambient potentials are functions of the ball
point w.  The decay class is x^m L^inf with boundary defining function
x = (1-|w|)/(1+|w|) = e^{-rho}, so the weighted norm of a radial profile is
sup |e^{m rho} V(rho)|.

Built-in families:

* ``gaussian_rho``: V(rho) = -A exp(-(rho/sigma)^2), super-exponential decay
  (m = inf), monotone on [0, inf) for A != 0.
* ``exp_decay``:    V(rho) = -A exp(-m rho).
* ``bump_ball``:    smooth ambient bump supported in |w| <= 1 - delta.
* ``tabulated``:    cubic-spline samples with a declared exponential tail.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erfc

from .errors import ValidationError
from .geometry import distance_to_origin

__all__ = [
    "RadialPotential",
    "AmbientPotential",
    "make_potential",
    "weighted_norm",
    "tabulated_from_csv",
    "radial_to_ambient",
]


@dataclass(frozen=True)
class RadialPotential:
    """Radial profile V(rho) with declared decay exponent.

    ``decay_exponent`` may be ``math.inf`` for super-exponential families.
    ``envelope(a)`` bounds |V| on [a, inf); ``tail_integral(a)`` bounds
    int_a^inf |V|; both are used to certify quadrature truncations.
    ``monotone`` is +1 when V is nondecreasing on (0, inf), -1 when
    nonincreasing, 0 for non-monotone/unknown.
    """

    profile: Callable[[np.ndarray], np.ndarray]
    decay_exponent: float
    family_tag: str = "custom"
    params: dict = field(default_factory=dict)
    monotone: int = 0
    _envelope: Callable[[float], float] | None = None
    _tail_integral: Callable[[float], float] | None = None

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        out = np.asarray(self.profile(rho), dtype=float)
        return out

    def envelope(self, a: float) -> float:
        """Upper bound for sup_{rho >= a} |V(rho)|."""
        if self._envelope is not None:
            return float(self._envelope(max(a, 0.0)))
        # generic: sample plus declared exponential tail
        m = self.decay_exponent
        grid = np.linspace(max(a, 0.0), max(a, 0.0) + 40.0, 2001)
        vals = np.abs(self(grid))
        if math.isinf(m):
            return float(vals.max())
        return float(max(vals.max(), vals[-1]))

    def tail_integral(self, a: float) -> float:
        """Upper bound for int_a^inf |V(rho)| d rho."""
        a = max(a, 0.0)
        if self._tail_integral is not None:
            return float(self._tail_integral(a))
        m = self.decay_exponent
        if math.isinf(m):
            # sampled bound: envelope decays faster than e^{-rho} eventually
            grid = np.linspace(a, a + 60.0, 4001)
            vals = np.abs(self(grid))
            return float(np.trapezoid(vals, grid) + vals[-1])
        env = self.envelope(a)
        return float(env / m) if m > 0 else math.inf

    def support_rho(self, threshold: float) -> float:
        """Smallest sampled radius beyond which |V| stays below threshold."""
        grid = np.linspace(0.0, 60.0, 6001)
        vals = np.abs(self(grid))
        above = np.nonzero(vals > threshold)[0]
        if above.size == 0:
            return 0.0
        return float(grid[min(above[-1] + 1, grid.size - 1)])

    def scaled(self, factor: float) -> "RadialPotential":
        """The potential factor*V (linearity helper for weak-coupling runs)."""
        base = self
        fac = float(factor)
        mono = base.monotone if fac > 0 else (-base.monotone if fac < 0 else 0)
        return RadialPotential(
            profile=lambda rho: fac * base.profile(rho),
            decay_exponent=base.decay_exponent,
            family_tag=base.family_tag,
            params={**base.params, "scale": fac},
            monotone=mono,
            _envelope=lambda a: abs(fac) * base.envelope(a),
            _tail_integral=lambda a: abs(fac) * base.tail_integral(a),
        )


@dataclass(frozen=True)
class AmbientPotential:
    """Potential as a function of the ball point w (vectorized over rows)."""

    eval: Callable[[np.ndarray], np.ndarray]
    decay_exponent: float
    support_radius_delta: float | None = None
    family_tag: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return np.asarray(self.eval(w), dtype=float)


def radial_to_ambient(pot: RadialPotential) -> AmbientPotential:
    """Lift V(rho) to V(w) = V(log((1+|w|)/(1-|w|)))."""

    def ev(w):
        w = np.asarray(w, dtype=float)
        r = np.linalg.norm(w, axis=-1)
        r = np.minimum(r, 1.0 - 1e-300)
        rho = np.log1p(r) - np.log1p(-r)
        return pot(rho)

    return AmbientPotential(
        eval=ev,
        decay_exponent=pot.decay_exponent,
        family_tag=pot.family_tag,
        params=dict(pot.params),
    )


def _gaussian(A: float, sigma: float) -> RadialPotential:
    if sigma <= 0:
        raise ValidationError("gaussian_rho requires sigma > 0")
    A = float(A)
    sigma = float(sigma)

    def prof(rho):
        return -A * np.exp(-((rho / sigma) ** 2))

    def env(a):
        return abs(A) * math.exp(-((a / sigma) ** 2))

    def tail(a):
        return abs(A) * sigma * math.sqrt(math.pi) / 2.0 * erfc(a / sigma)

    return RadialPotential(
        profile=prof,
        decay_exponent=math.inf,
        family_tag="gaussian_rho",
        params={"A": A, "sigma": sigma},
        monotone=(1 if A > 0 else (-1 if A < 0 else 0)),
        _envelope=env,
        _tail_integral=tail,
    )


def _exp_decay(A: float, m: float) -> RadialPotential:
    if m <= 0:
        raise ValidationError("exp_decay requires decay exponent m > 0")
    A = float(A)
    m = float(m)
    return RadialPotential(
        profile=lambda rho: -A * np.exp(-m * rho),
        decay_exponent=m,
        family_tag="exp_decay",
        params={"A": A, "m": m},
        monotone=(1 if A > 0 else (-1 if A < 0 else 0)),
        _envelope=lambda a: abs(A) * math.exp(-m * a),
        _tail_integral=lambda a: abs(A) / m * math.exp(-m * a),
    )


def _bump_ball(delta: float, A: float = 1.0) -> AmbientPotential:
    if not (0.0 < delta < 1.0):
        raise ValidationError("bump_ball requires 0 < delta < 1")
    A = float(A)
    R = 1.0 - float(delta)

    def ev(w):
        w = np.asarray(w, dtype=float)
        q2 = np.sum(w * w, axis=-1) / (R * R)
        out = np.zeros(q2.shape)
        inside = q2 < 1.0
        out[inside] = -A * np.exp(1.0 - 1.0 / (1.0 - q2[inside]))
        return out

    return AmbientPotential(
        eval=ev,
        decay_exponent=math.inf,
        support_radius_delta=float(delta),
        family_tag="bump_ball",
        params={"delta": float(delta), "A": A},
    )


def _tabulated(rho: np.ndarray, values: np.ndarray, tail_exponent: float) -> RadialPotential:
    rho = np.asarray(rho, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.iscomplexobj(values):
        raise ValidationError("tabulated potentials must be real valued")
    if rho.ndim != 1 or rho.size < 4 or values.shape != rho.shape:
        raise ValidationError("tabulated requires matching 1-d arrays with >= 4 samples")
    if rho[0] != 0.0 or np.any(np.diff(rho) <= 0):
        raise ValidationError("tabulated rho grid must start at 0 and increase strictly")
    if tail_exponent is None or not tail_exponent > 0:
        raise ValidationError("tabulated requires a declared positive tail exponent")
    m = float(tail_exponent)
    spline = CubicSpline(rho, values)
    rho_last = float(rho[-1])
    v_last = float(values[-1])
    C = v_last * math.exp(m * rho_last)

    def prof(x):
        x = np.asarray(x, dtype=float)
        out = np.where(x <= rho_last, spline(np.minimum(x, rho_last)),
                       C * np.exp(-m * np.maximum(x, rho_last)))
        return out

    dense = spline(np.linspace(0.0, rho_last, 8 * rho.size))
    sup = float(np.abs(dense).max())

    def env(a):
        if a >= rho_last:
            return abs(C) * math.exp(-m * a)
        xs = np.linspace(a, rho_last, 512)
        return float(max(np.abs(spline(xs)).max(), abs(v_last)))

    def tail(a):
        if a >= rho_last:
            return abs(C) / m * math.exp(-m * a)
        xs = np.linspace(a, rho_last, 1024)
        return float(np.trapezoid(np.abs(spline(xs)), xs)) + abs(v_last) / m

    fd = np.diff(dense)
    live = np.abs(dense[:-1]) > 1e-13
    mono = 0
    if np.all(fd[live] >= 0):
        mono = 1
    elif np.all(fd[live] <= 0):
        mono = -1
    return RadialPotential(
        profile=prof,
        decay_exponent=m,
        family_tag="tabulated",
        params={"n_samples": int(rho.size), "tail_exponent": m, "sup": sup},
        monotone=mono,
        _envelope=env,
        _tail_integral=tail,
    )


_FAMILIES = {
    "gaussian_rho": _gaussian,
    "exp_decay": _exp_decay,
    "bump_ball": _bump_ball,
    "tabulated": _tabulated,
}


def make_potential(family_tag: str, **params):
    """Construct a built-in potential family.

    ``gaussian_rho(A, sigma)``, ``exp_decay(A, m)``, ``bump_ball(delta, A=1)``,
    ``tabulated(rho, values, tail_exponent)``, ``zero()``.
    """
    if family_tag == "zero":
        return RadialPotential(
            profile=lambda rho: np.zeros_like(np.asarray(rho, dtype=float)),
            decay_exponent=math.inf,
            family_tag="zero",
            monotone=0,
            _envelope=lambda a: 0.0,
            _tail_integral=lambda a: 0.0,
        )
    try:
        factory = _FAMILIES[family_tag]
    except KeyError:
        raise ValidationError(f"unknown potential family {family_tag!r}") from None
    for v in params.values():
        if isinstance(v, complex):
            raise ValidationError("potential parameters must be real")
    return factory(**params)


def tabulated_from_csv(path_or_buffer, tail_exponent: float) -> RadialPotential:
    """Read a two-column ``rho,value`` CSV into a tabulated potential."""
    if isinstance(path_or_buffer, (str,)):
        with open(path_or_buffer, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = path_or_buffer.read()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].replace(" ", "") != "rho,value":
        raise ValidationError("tabulated CSV must start with header 'rho,value'")
    data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", ndmin=2)
    return _tabulated(data[:, 0], data[:, 1], tail_exponent)


def weighted_norm(pot, m: float, grid) -> float:
    """Grid maximum of |x(w)^{-m} V(w)| (ambient) or |e^{m rho} V(rho)| (radial).

    A lower bound for the true x^m L^inf norm; used for diagnostics and
    tail-truncation bounds.
    """
    if isinstance(pot, RadialPotential):
        rho = np.asarray(grid, dtype=float)
        if rho.size == 0:
            raise ValidationError("weighted_norm needs a nonempty grid")
        if np.any(rho < 0):
            raise ValidationError("radial grid must be nonnegative")
        return float(np.max(np.abs(np.exp(m * rho) * pot(rho))))
    w = np.atleast_2d(np.asarray(grid, dtype=float))
    if w.size == 0:
        raise ValidationError("weighted_norm needs a nonempty grid")
    r = np.linalg.norm(w, axis=-1)
    if np.any(r >= 1.0):
        raise ValidationError("ambient grid must lie strictly inside the ball")
    x = (1.0 - r) / (1.0 + r)
    return float(np.max(np.abs(pot(w) * x ** (-m))))
