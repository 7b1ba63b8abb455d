"""Quantum-classical comparison of phase-shift statistics.

The rescaled-shift measure at h = 1/lambda pairs with a test function f as

    <mu_h, f> = (2 pi h)^n sum_k d_k f(delta_k / h),

d_k the harmonic multiplicity.  As h -> 0 this converges to the pairing of
the classical measure, vol(S^n) vol(S^{n-1}) int f(G_V(r)) r^{n-1} dr, and
for monomials f = t^p the comparison is tabulated in a TraceReport along
with a least-squares convergence-order fit in h.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import TailDominatedWarning, ValidationError
from .potentials import RadialPotential
from .radial import PhaseShiftSpectrum, phase_spectrum, suggest_kmax
from .xray import ClassicalProfile, classical_nu_integral, xray_radial_profile

__all__ = [
    "mu_h_pairing",
    "SampledFunction",
    "moment_compare",
    "convergence_study",
    "TraceReport",
    "TraceRow",
]


@dataclass(frozen=True)
class SampledFunction:
    """Compactly supported continuous f given by samples, vanishing near 0.

    Linear interpolation between samples, zero outside their range; the
    samples must vanish on [-zero_radius, zero_radius].
    """

    ts: np.ndarray
    ys: np.ndarray
    zero_radius: float

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if ts.ndim != 1 or ts.shape != ys.shape or ts.size < 2:
            raise ValidationError("SampledFunction needs matching 1-d sample arrays")
        if np.any(np.diff(ts) <= 0):
            raise ValidationError("sample abscissae must increase strictly")
        if self.zero_radius <= 0:
            raise ValidationError("zero_radius must be positive")
        inside = np.abs(ts) <= self.zero_radius
        if np.any(ys[inside] != 0.0):
            raise ValidationError("samples must vanish on the declared neighborhood of 0")
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "ys", ys)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.ts, self.ys, left=0.0, right=0.0)
        return np.where(np.abs(t) <= self.zero_radius, 0.0, out)


def mu_h_pairing(spectrum: PhaseShiftSpectrum, f, n: int | None = None) -> float:
    """(2 pi h)^n sum_k d_k f(delta_k / h), summed in ascending degree.

    Warns when the last decile of degrees contributes more than 1% of the
    total (the spectrum tail is then not converged for this f).
    """
    n = spectrum.n if n is None else n
    if n != spectrum.n:
        raise ValidationError("dimension mismatch between spectrum and pairing")
    h = spectrum.h
    vals = np.asarray([f(d / h) for d in spectrum.deltas], dtype=float)
    terms = spectrum.multiplicities * vals
    total = float((2.0 * math.pi * h) ** n * np.sum(terms))
    tail_sel = spectrum.ks > 0.9 * spectrum.kmax
    tail = float((2.0 * math.pi * h) ** n * np.sum(terms[tail_sel]))
    if total != 0.0 and abs(tail) > 0.01 * abs(total):
        warnings.warn(f"last-decile contribution {tail:.3e} exceeds 1% of the "
                      f"pairing {total:.3e}", TailDominatedWarning, stacklevel=2)
    return total


def _monomial(p: int):
    def f(t):
        return t ** p
    return f


def _check_moment_precondition(p: int, m: float, n: int) -> None:
    if p < 1:
        raise ValidationError("moment order p must be >= 1")
    if not math.isinf(m):
        need = 2.0 * (n - 0.5) / (m - 1.0) if m > 1.0 else math.inf
        if p <= need:
            raise ValidationError(
                f"moment order p={p} requires p > {need:.3g} for decay exponent m={m}")


@dataclass(frozen=True)
class TraceRow:
    lam: float
    h: float
    p: int
    quantum: float
    classical: float
    abs_err: float
    rel_err: float
    sin_vs_angle: float  # same pairing with sin(delta)/h in place of delta/h


@dataclass(frozen=True)
class TraceReport:
    """Rows of quantum/classical moment comparisons plus a convergence fit."""

    rows: list
    fit_slope: float | None = None
    fit_residual: float | None = None
    meta: dict = field(default_factory=dict)

    def to_csv(self, fh) -> None:
        fh.write("lambda,h,p,quantum,classical,abs_err,rel_err\n")
        for r in self.rows:
            fh.write(f"{r.lam:.17g},{r.h:.17g},{r.p},{r.quantum:.17g},"
                     f"{r.classical:.17g},{r.abs_err:.17g},{r.rel_err:.17g}\n")

    def summary(self) -> dict:
        return {
            "fit_slope": self.fit_slope,
            "fit_residual": self.fit_residual,
            "rows": [
                {"lambda": r.lam, "h": r.h, "p": r.p, "quantum": r.quantum,
                 "classical": r.classical, "abs_err": r.abs_err,
                 "rel_err": r.rel_err, "sin_vs_angle": r.sin_vs_angle}
                for r in self.rows
            ],
            **self.meta,
        }

    def to_json(self, fh) -> None:
        json.dump(self.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _classical_moment(profile: ClassicalProfile, p: int, n: int, tol: float) -> float:
    return classical_nu_integral(profile, _monomial(p), n, tol=tol, p=p)


def moment_compare(pot: RadialPotential, n: int, lam: float, p_list,
                   tol: float = 1e-8, kmax: int | None = None,
                   spectrum: PhaseShiftSpectrum | None = None,
                   profile: ClassicalProfile | None = None) -> list:
    """TraceRow list comparing quantum and classical moments at one energy.

    A precomputed spectrum/profile can be passed to share work across
    energies; otherwise they are computed with the default policies.
    """
    if spectrum is None:
        if kmax is None:
            kmax = suggest_kmax(pot, lam, n)
        spectrum = phase_spectrum(lam, kmax, pot, n)
    if profile is None:
        profile = _default_profile(pot, n)
    rows = []
    h = spectrum.h
    for p in p_list:
        _check_moment_precondition(int(p), pot.decay_exponent, n)
        quantum = mu_h_pairing(spectrum, _monomial(int(p)))
        classical = _classical_moment(profile, int(p), n, tol)
        sin_pair = float((2.0 * math.pi * h) ** n *
                         np.sum(spectrum.multiplicities *
                                (np.sin(spectrum.deltas) / h) ** int(p)))
        abs_err = abs(quantum - classical)
        rel = abs_err / abs(classical) if classical != 0.0 else math.inf
        rows.append(TraceRow(lam=float(lam), h=h, p=int(p), quantum=quantum,
                             classical=classical, abs_err=abs_err, rel_err=rel,
                             sin_vs_angle=sin_pair))
    return rows


def _default_profile(pot: RadialPotential, n: int, tol: float = 1e-10) -> ClassicalProfile:
    r = np.concatenate([np.linspace(0.0, 4.0, 201),
                        np.geomspace(4.1, 64.0, 160)])
    return xray_radial_profile(pot, r, tol=tol)


def convergence_study(pot: RadialPotential, n: int, lambda_list, p: int,
                      tol: float = 1e-8, kmax_policy=None) -> TraceReport:
    """Fit the order of |quantum - classical| against h over several energies.

    Needs at least three energies.  When every error is at rounding level the
    slope is reported as None (undefined), as happens for V = 0.
    """
    lams = sorted(float(x) for x in lambda_list)
    if len(lams) < 3:
        raise ValidationError("convergence_study needs at least 3 lambda values")
    profile = _default_profile(pot, n)
    rows = []
    for lam in lams:
        kmax = kmax_policy(lam) if kmax_policy else suggest_kmax(pot, lam, n)
        spec = phase_spectrum(lam, kmax, pot, n)
        rows.extend(moment_compare(pot, n, lam, [p], tol=tol,
                                   spectrum=spec, profile=profile))
    errs = np.array([r.abs_err for r in rows])
    hs = np.array([r.h for r in rows])
    scale = max(abs(r.classical) for r in rows)
    if np.all(errs <= 1e-12 * max(scale, 1.0)):
        return TraceReport(rows=rows, fit_slope=None, fit_residual=None,
                           meta={"p": p, "note": "errors at rounding level"})
    coeffs, residuals, *_ = np.polyfit(np.log(hs), np.log(errs), 1, full=True)
    resid = float(residuals[0]) if len(residuals) else 0.0
    return TraceReport(rows=rows, fit_slope=float(coeffs[0]),
                       fit_residual=resid, meta={"p": p})
