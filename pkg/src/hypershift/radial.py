"""Quantum side: relative scattering phase shifts of radial potentials.

Separation of variables on H^{n+1} reduces the generalized eigenfunction
equation at energy n^2/4 + lam^2 to one radial problem per harmonic degree
k.  The Liouville substitution v = sinh(rho)^{n/2} u turns it into

    v'' = (Q_k(rho) - lam^2) v,
    Q_k(rho) = V(rho) + (k(k+n-1) + n(n-2)/4) / sinh(rho)^2,

whose regular solution behaves like rho^{k+n/2} at the origin and like
a_minus e^{-i lam rho} + a_plus e^{+i lam rho} far out (boundary defining
function x = e^{-rho}).  The degree-k eigenvalue of the relative scattering
matrix is the ratio of the perturbed to the free outgoing/incoming ratio,

    e^{i delta_k} = (a_+^V / a_-^V) / (a_+^0 / a_-^0),

computed from paired runs with identical solver settings so normalization
and matching bias cancel.  For real V the solutions are real and the ratios
have unit modulus identically.

``born_eigenvalue_h2`` provides the independent weak-coupling oracle on H^2:
the degree-k eigenvalue of the rescaled anti-self-adjoint first-order
response operator, normalized so that it reproduces lim eps->0
lam*delta_k(eps V)/eps and, at high energy, the classical profile G_V(k/lam).
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from . import _modesolver as _ms
from .errors import (StiffnessError, TailNotConvergedWarning, ToleranceError,
                     ValidationError)
from .geometry import SUPPORTED_DIMS
from .potentials import RadialPotential
from .specfun import harmonic_dimension
from .xray import xray_radial_profile

__all__ = [
    "centrifugal_constant",
    "liouville_Q",
    "regular_solution",
    "ConnectionCoefficients",
    "connection_coefficients",
    "relative_phase_shift",
    "PhaseShiftSpectrum",
    "phase_spectrum",
    "suggest_kmax",
    "born_eigenvalue_h2",
    "born_eigenvalues_h2",
    "born_kernel_h2",
]

_SPLINE_STEP = 2e-3
_DEFAULT_RHO_MATCH = 12.0
_DEFAULT_DELTA_RHO = 1.5


def _thread_cap() -> None:
    cap = os.environ.get("HYPERSHIFT_THREADS")
    if cap:
        try:
            import numba
            numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))
        except (ValueError, ImportError):
            pass


def centrifugal_constant(k: int, n: int) -> float:
    """k(k+n-1) + n(n-2)/4; the 1/sinh^2 coefficient after the Liouville map."""
    return k * (k + n - 1.0) + n * (n - 2.0) / 4.0


def liouville_Q(k: int, pot: RadialPotential, n: int):
    """The effective potential Q_k(rho) = V(rho) + c_{k,n}/sinh(rho)^2."""
    if n not in SUPPORTED_DIMS:
        raise ValidationError(f"n={n} not in {SUPPORTED_DIMS}")
    c = centrifugal_constant(k, n)

    def Q(rho):
        rho = np.asarray(rho, dtype=float)
        return pot(rho) + c / np.sinh(rho) ** 2

    return Q


def _spline_pack(pot: RadialPotential | None, rho_max: float):
    """(x0, dx, coef, has_v) cubic-spline tables for the jitted marcher."""
    if pot is None or pot.family_tag == "zero":
        return 0.0, 1.0, np.zeros((4, 1)), False
    xs = np.arange(0.0, rho_max + 4 * _SPLINE_STEP, _SPLINE_STEP)
    vals = pot(xs)
    if not np.all(np.isfinite(vals)):
        raise ValidationError("potential profile must be finite on the solver grid")
    if np.max(np.abs(vals)) == 0.0:
        return 0.0, 1.0, np.zeros((4, 1)), False
    cs = CubicSpline(xs, vals)
    return float(xs[0]), _SPLINE_STEP, np.ascontiguousarray(cs.c), True


def _raise_status(status: int) -> None:
    if status == _ms.STATUS_STIFF:
        raise StiffnessError("mode integration step collapsed below 1e-13")
    if status == _ms.STATUS_STEPCAP:
        raise ToleranceError("mode integration exceeded its step budget")


def regular_solution(k: int, lam: float, pot: RadialPotential | None, n: int,
                     rho_max: float, tol: float = 1e-10, rho0: float | None = None,
                     method: str = "adaptive"):
    """Regular solution (v, v') of degree k at rho_max (scale-normalized).

    ``method='adaptive'`` runs the production Dormand-Prince marcher;
    ``method='reference'`` runs an independent scipy DOP853 integration used
    as an oracle in the tests.  The returned pair is scaled so that
    max(|v|, |v'|/lam) = 1; only the direction matters for phase extraction.
    """
    if rho0 is not None and not (0.0 < rho0 < 0.1):
        raise ValidationError("rho0 must lie in (0, 0.1)")
    if lam <= 0:
        raise ValidationError("lambda must be positive")
    rtol = max(min(tol, 1e-8), 1e-13)
    stops = np.array([float(rho_max)])
    pack = _spline_pack(pot, rho_max + 1.0)
    if method == "adaptive":
        res, status = _ms.solve_single(float(k), float(n), float(lam), stops,
                                       *pack, rtol, -1.0 if rho0 is None else rho0)
        _raise_status(int(status))
        v, vp = res[0, 0], res[0, 1]
    elif method == "reference":
        c = centrifugal_constant(k, n)
        alpha = k + n / 2.0
        r0 = rho0 if rho0 is not None else min(0.01, 1e-3 / lam)
        v0 = float(pot(np.zeros(1))[0]) if pot is not None else 0.0
        b = (v0 - lam * lam - alpha * (alpha - 1.0) / 3.0) / (4.0 * alpha + 2.0)
        y0 = [1.0 + b * r0 * r0, alpha / r0 + (alpha + 2.0) * b * r0]

        def rhs(rho, y):
            q = c / math.sinh(rho) ** 2
            if pot is not None:
                q += float(pot(np.array([rho]))[0])
            return [y[1], (q - lam * lam) * y[0]]

        sol = solve_ivp(rhs, (r0, rho_max), y0, method="DOP853",
                        rtol=rtol, atol=1e-290)
        if not sol.success:
            raise StiffnessError(f"reference integration failed: {sol.message}")
        v, vp = sol.y[0, -1], sol.y[1, -1]
    else:
        raise ValidationError(f"unknown method {method!r}")
    scale = max(abs(v), abs(vp) / lam)
    return v / scale, vp / scale


def _tuned_delta_rho(lam: float, base: float = _DEFAULT_DELTA_RHO) -> float:
    """Nearest offset to ``base`` with lam*delta = pi/2 (mod pi).

    Places the two matching radii in phase quadrature so the residual
    O(e^{-2 rho}) contamination cancels in the two-radius average.
    """
    m = round((lam * base - math.pi / 2.0) / math.pi)
    return (math.pi / 2.0 + max(m, 0) * math.pi) / lam


def _check_delta_rho(lam: float, delta_rho: float) -> None:
    frac = (lam * delta_rho) % math.pi
    if min(frac, math.pi - frac) < 1e-3:
        raise ValidationError(
            "degenerate matching radii: lam*(rho_B - rho_A) is within 1e-3 "
            "of a multiple of pi")


def _ratios(res: np.ndarray, lam: float, stops: np.ndarray) -> np.ndarray:
    """Unit-modulus a_+/a_- at each stop from real (v, v') data.

    From v = a_- e^{-i lam rho} + a_+ e^{i lam rho}:
    2 a_+ e^{+i lam rho} = v + v'/(i lam) = (lam v - i v')/lam,
    2 a_- e^{-i lam rho} = v - v'/(i lam) = (lam v + i v')/lam;
    for real solutions the moduli cancel exactly in the quotient.
    """
    v = res[..., 0]
    vp = res[..., 1]
    num = (lam * v - 1j * vp)  # proportional to a_+ e^{+i lam rho}
    den = (lam * v + 1j * vp)  # proportional to a_- e^{-i lam rho}
    ratio = num / den * np.exp(-2j * lam * stops)
    return ratio / np.abs(ratio)


def default_rho_match(pot: RadialPotential | None, lam: float) -> float:
    supp = 0.0 if pot is None else pot.support_rho(1e-14)
    return max(_DEFAULT_RHO_MATCH, supp + 2.0)


@dataclass(frozen=True)
class ConnectionCoefficients:
    """Asymptotic coefficients of one radial mode at the matching radius.

    ``ratio`` is the two-radius refined a_plus/a_minus (unit modulus for
    real potentials); a_minus and a_plus themselves are reported at
    ``rho_match`` in the solver's arbitrary-but-deterministic scale.
    """

    k: int
    lam: float
    a_minus: complex
    a_plus: complex
    rho_match: float
    ratio: complex

    def __post_init__(self):
        if self.a_minus == 0:
            raise ValidationError("degenerate mode: vanishing incoming coefficient")


def _mode_endpoints(ks, lam, pot, n, rho_match, delta_rho, rtol):
    stops = np.array([rho_match, rho_match + delta_rho])
    pack = _spline_pack(pot, stops[-1] + 1.0)
    _thread_cap()
    res, status = _ms.solve_batch(np.asarray(ks, dtype=float), float(n), float(lam),
                                  stops, *pack, rtol)
    bad = status[status != 0]
    if bad.size:
        _raise_status(int(bad[0]))
    return res, stops


def connection_coefficients(k: int, lam: float, pot: RadialPotential | None, n: int,
                            rho_match: float | None = None, tol: float = 1e-9,
                            delta_rho: float | None = None) -> ConnectionCoefficients:
    """Extract (a_-, a_+) of the degree-k regular mode at the matching radius."""
    if rho_match is None:
        rho_match = default_rho_match(pot, lam)
    if delta_rho is None:
        delta_rho = _tuned_delta_rho(lam)
    _check_delta_rho(lam, delta_rho)
    rtol = max(min(tol * 1e-2, 1e-9), 1e-13)
    res, stops = _mode_endpoints([k], lam, pot, n, rho_match, delta_rho, rtol)
    ratios = _ratios(res[0], lam, stops)
    mean = ratios[0] / abs(ratios[0]) + ratios[1] / abs(ratios[1])
    ratio = complex(mean / abs(mean))
    v, vp = res[0, 0, 0], res[0, 0, 1]
    a_plus = 0.5 * (v + vp / (1j * lam)) * np.exp(-1j * lam * stops[0])
    a_minus = 0.5 * (v - vp / (1j * lam)) * np.exp(+1j * lam * stops[0])
    return ConnectionCoefficients(k=int(k), lam=float(lam), a_minus=complex(a_minus),
                                  a_plus=complex(a_plus), rho_match=float(stops[0]),
                                  ratio=ratio)


def relative_phase_shift(k: int, lam: float, pot: RadialPotential, n: int,
                         tol: float = 1e-9) -> float:
    """delta_k = arg[(a_+^V/a_-^V) / (a_+^0/a_-^0)] in [-pi, pi)."""
    cc_v = connection_coefficients(k, lam, pot, n, tol=tol)
    cc_0 = connection_coefficients(k, lam, None, n, rho_match=cc_v.rho_match, tol=tol)
    t = cc_v.ratio * np.conj(cc_0.ratio)
    return float(np.angle(t))


@dataclass(frozen=True)
class PhaseShiftSpectrum:
    """Relative phase shifts delta_k with harmonic multiplicities at one energy."""

    lam: float
    n: int
    ks: np.ndarray
    deltas: np.ndarray
    multiplicities: np.ndarray
    kmax: int
    tol: float
    tail_bound: float

    @property
    def h(self) -> float:
        return 1.0 / self.lam

    @property
    def entries(self):
        return list(zip(self.ks.tolist(), self.deltas.tolist(),
                        self.multiplicities.tolist()))

    def to_csv(self, fh) -> None:
        fh.write("k,delta,multiplicity\n")
        for k, d, m in zip(self.ks, self.deltas, self.multiplicities):
            fh.write(f"{int(k)},{d:.17g},{int(m)}\n")

    def sidecar(self) -> dict:
        return {"lambda": self.lam, "n": self.n, "kmax": self.kmax,
                "tol": self.tol, "tail_bound": self.tail_bound}

    @classmethod
    def from_csv(cls, fh, sidecar: dict) -> "PhaseShiftSpectrum":
        header = fh.readline().strip()
        if header.replace(" ", "") != "k,delta,multiplicity":
            raise ValidationError("spectrum CSV must start with 'k,delta,multiplicity'")
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls(lam=float(sidecar["lambda"]), n=int(sidecar["n"]),
                   ks=rows[:, 0].astype(int), deltas=rows[:, 1],
                   multiplicities=rows[:, 2].astype(int),
                   kmax=int(sidecar["kmax"]), tol=float(sidecar["tol"]),
                   tail_bound=float(sidecar["tail_bound"]))


def phase_spectrum(lam: float, kmax: int, pot: RadialPotential, n: int,
                   tol: float = 1e-9) -> PhaseShiftSpectrum:
    """Phase shifts for k = 0..kmax with multiplicities and a tail bound.

    Modes are independent tasks; the batch runs them in parallel (capped by
    HYPERSHIFT_THREADS) and assembles results in degree order, so repeated
    runs are bit-identical.
    """
    if kmax < 2:
        raise ValidationError("kmax must be at least 2")
    if n not in SUPPORTED_DIMS:
        raise ValidationError(f"n={n} not in {SUPPORTED_DIMS}")
    rho_match = default_rho_match(pot, lam)
    delta_rho = _tuned_delta_rho(lam)
    rtol = max(min(tol * 1e-2, 1e-9), 1e-13)
    ks = np.arange(0, kmax + 1)
    res_v, stops = _mode_endpoints(ks, lam, pot, n, rho_match, delta_rho, rtol)
    res_0, _ = _mode_endpoints(ks, lam, None, n, rho_match, delta_rho, rtol)
    rv = _ratios(res_v, lam, stops)
    r0 = _ratios(res_0, lam, stops)
    t = rv * np.conj(r0)
    mean = t[:, 0] + t[:, 1]
    deltas = np.angle(mean / np.abs(mean))
    mults = np.array([harmonic_dimension(int(k), n) for k in ks], dtype=np.int64)
    tail_sel = ks > 0.9 * kmax
    tail_bound = float(np.max(np.abs(deltas[tail_sel]))) if tail_sel.any() else 0.0
    if tail_bound > 10.0 * tol:
        warnings.warn(f"spectrum tail |delta| up to {tail_bound:.2e} at kmax={kmax}; "
                      "increase kmax for converged pairings",
                      TailNotConvergedWarning, stacklevel=2)
    return PhaseShiftSpectrum(lam=float(lam), n=int(n), ks=ks, deltas=deltas,
                              multiplicities=mults, kmax=int(kmax), tol=float(tol),
                              tail_bound=tail_bound)


def suggest_kmax(pot: RadialPotential, lam: float, n: int,
                 g_tail_rel: float = 1e-4) -> int:
    """kmax = ceil(2 lam R) with R the radius where |G_V| drops below
    g_tail_rel times its maximum."""
    r_probe = np.linspace(0.0, 64.0, 257)
    prof = xray_radial_profile(pot, r_probe, tol=1e-8)
    gmax = float(np.max(np.abs(prof.g_values)))
    if gmax == 0.0:
        return 2
    R = prof.support_radius(g_tail_rel * gmax)
    return max(2, math.ceil(2.0 * lam * max(R, 1.0)))


# ----------------------------------------------------------------- Born oracle

def _born_weights(lam: float, pot: RadialPotential, tol: float):
    """(rho grid, weights, psi count) for the disk reduction of the response
    kernel; rho_max certified from the potential tail against the log-growth
    of the angular factor."""
    rho_max = 2.0
    while (pot.envelope(rho_max) * (rho_max + 4.0) ** 2 * lam > tol / 10.0
           and rho_max < 60.0):
        rho_max += 0.5
    n_psi = 1
    target = 8.0 * lam * math.sinh(rho_max) + 256
    while n_psi < target:
        n_psi *= 2
    n_psi = min(n_psi, 1 << 21)
    return rho_max, n_psi


def born_eigenvalues_h2(kmax: int, lam: float, pot: RadialPotential,
                        tol: float = 1e-6) -> np.ndarray:
    """Degree 0..kmax eigenvalues of the rescaled first-order response on H^2.

    For radial V the operator diagonalizes on Fourier modes and the
    eigenvalue reduces to a radial integral against |J_k|^2 with

        J_k(r) = int_0^{2pi} e^{ik psi} (1 - 2 r cos psi + r^2)^{(-1+2i lam)/2} d psi,

        b_k = -(lam tanh(pi lam) / pi) int_0^inf V(rho) tanh(rho/2)/2
                                               |J_k(r(rho))|^2 d rho,

    r = tanh(rho/2).  The normalization is fixed by unitarity of the
    boundary expansion so that b_k equals lim_{eps->0} lam delta_k(eps V)/eps
    (see the ledger tests); sign: attractive V gives positive b_k.
    """
    if lam <= 0 or kmax < 0:
        raise ValidationError("born_eigenvalues_h2 requires lam > 0, kmax >= 0")
    rho_max, n_psi = _born_weights(lam, pot, tol)
    # oscillation guard: the angular spacing must resolve the boundary phase
    if lam * (2.0 * math.pi / n_psi) > 0.3:
        raise ToleranceError("angular grid too coarse for the oscillatory phase")
    pref = -(lam * math.tanh(math.pi * lam) / math.pi)
    expo = (-1.0 + 2j * lam) / 2.0
    cos_psi = np.cos(np.arange(n_psi) * (2.0 * math.pi / n_psi))

    def accumulate(d_rho: float) -> np.ndarray:
        rho = np.arange(d_rho / 2.0, rho_max, d_rho)
        r = np.tanh(rho / 2.0)
        wts = pref * 0.5 * np.tanh(rho / 2.0) * pot(rho) * d_rho
        out = np.zeros(kmax + 1)
        chunk = max(1, int(2e7 // n_psi))
        for i0 in range(0, rho.size, chunk):
            rr = r[i0:i0 + chunk][:, None]
            base = (1.0 - 2.0 * rr * cos_psi[None, :] + rr * rr) ** expo
            J = np.fft.fft(base, axis=1) * (2.0 * math.pi / n_psi)
            out += wts[i0:i0 + chunk] @ (np.abs(J[:, :kmax + 1]) ** 2)
        return out

    # the radial integrand carries stationary-phase oscillations at ~2*lam;
    # the midpoint rule is O(d^2), Richardson extrapolation lifts it to O(d^4)
    d_rho = min(0.01, 0.5 / lam)
    prev = accumulate(d_rho)
    rich_prev = None
    for _ in range(4):
        d_rho *= 0.5
        cur = accumulate(d_rho)
        rich = (4.0 * cur - prev) / 3.0
        if rich_prev is not None and np.max(np.abs(rich - rich_prev)) <= max(tol, 1e-13):
            return rich
        prev, rich_prev = cur, rich
    raise ToleranceError("Born radial quadrature did not converge")


def born_eigenvalue_h2(k: int, lam: float, pot: RadialPotential,
                       tol: float = 1e-6) -> float:
    """Single-degree version of :func:`born_eigenvalues_h2` (n = 1 only)."""
    return float(born_eigenvalues_h2(int(k), lam, pot, tol)[int(k)])


def born_kernel_h2(beta, lam: float, pot: RadialPotential,
                   n_rho: int = 600, oversample: float = 8.0) -> np.ndarray:
    """Direct two-dimensional quadrature of the rescaled response kernel.

    Returns the kernel of the self-adjoint operator at boundary angle
    separations ``beta``; independent of the Fourier reduction (used to
    validate it and the anti-self-adjointness of the unscaled operator).
    Intended for moderate lam (test sizes).
    """
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    rho_max, _ = _born_weights(lam, pot, 1e-7)
    rho = np.linspace(rho_max / n_rho / 2.0, rho_max, n_rho)
    r = np.tanh(rho / 2.0)
    d_rho = rho[1] - rho[0]
    n_phi = 128
    while n_phi < oversample * lam * math.sinh(rho_max):
        n_phi *= 2
    phi = np.arange(n_phi) * (2.0 * math.pi / n_phi)
    pref = -(lam * math.tanh(math.pi * lam) / math.pi)
    out = np.zeros(beta.shape, dtype=complex)
    expo_m = (-1.0 - 2j * lam) / 2.0
    expo_p = (-1.0 + 2j * lam) / 2.0
    w_r = 0.5 * np.tanh(rho / 2.0) * pot(rho) * d_rho * (2.0 * math.pi / n_phi)
    chunk = max(1, int(4e6 // n_phi))
    for i0 in range(0, n_rho, chunk):
        rr = r[i0:i0 + chunk][:, None]
        fac0 = (1.0 - 2.0 * rr * np.cos(phi)[None, :] + rr * rr) ** expo_m
        for j, b in enumerate(beta):
            facb = (1.0 - 2.0 * rr * np.cos(phi[None, :] - b) + rr * rr) ** expo_p
            out[j] += np.sum(w_r[i0:i0 + chunk, None] * fac0 * facb)
    return pref * out
