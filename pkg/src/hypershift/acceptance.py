"""Acceptance criteria A1-A9: one function per criterion, shared caches.

Each criterion reports pass/fail at its stated tolerance; ``run_all`` prints
one line per criterion.  The CLI ``selftest`` subcommand and the pytest
acceptance module both drive this runner.  Expensive artifacts (phase-shift
spectra, classical profiles) are computed once and shared.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import GeodesicChart
from .potentials import make_potential, radial_to_ambient
from .radial import (born_eigenvalues_h2, connection_coefficients,
                     phase_spectrum, suggest_kmax)
from .specfun import complex_log_gamma, free_eigenvalue_mu_k
from .trace import mu_h_pairing
from .xray import classical_nu_integral, xray_general, xray_radial_profile
from .inversion import potential_from_profile, profile_from_measure

__all__ = ["CriterionResult", "AcceptanceContext", "run_all", "CRITERIA"]


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _random_chart(rng, n: int, xi_norm: float) -> GeodesicChart:
    theta = rng.normal(size=n + 1)
    theta /= np.linalg.norm(theta)
    e = rng.normal(size=n + 1)
    e -= np.dot(e, theta) * theta
    e /= np.linalg.norm(e)
    return GeodesicChart(theta, xi_norm * e)


class AcceptanceContext:
    """Lazily computed shared artifacts used by several criteria."""

    def __init__(self):
        self._spectra = {}
        self._profiles = {}
        self.pot_half = make_potential("gaussian_rho", A=0.5, sigma=1.0)
        self.pot_one = make_potential("gaussian_rho", A=1.0, sigma=1.0)

    def spectrum(self, tag: str, lam: float, kmax: int, pot, n: int,
                 tol: float = 1e-9):
        key = (tag, lam, kmax, n)
        if key not in self._spectra:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                self._spectra[key] = phase_spectrum(lam, kmax, pot, n, tol=tol)
        return self._spectra[key]

    def profile(self, tag: str, pot, r_grid) -> np.ndarray:
        key = (tag, len(r_grid), float(r_grid[-1]))
        if key not in self._profiles:
            self._profiles[key] = xray_radial_profile(pot, r_grid, tol=1e-10)
        return self._profiles[key]


# ------------------------------------------------------------------ criteria

def a1_xray_support(ctx: AcceptanceContext):
    """bump_ball(0.5): X(V) vanishes on every chart with |xi| >= 2."""
    rng = np.random.default_rng(11)
    pot = make_potential("bump_ball", delta=0.5)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 3))
        xi_norm = 2.0 + 8.0 * rng.random()
        val = xray_general(pot, _random_chart(rng, n, xi_norm), tol=1e-12)
        worst = max(worst, abs(val))
    return worst < 1e-12, f"max |X(V)| = {worst:.3e} over 100 charts (tol 1e-12)"


def a2_radial_general_consistency(ctx: AcceptanceContext):
    """Radial-profile route equals the chart route at matched arguments."""
    rng = np.random.default_rng(23)
    worst = 0.0
    for n in (1, 2):
        r = np.sort(0.05 + 4.95 * rng.random(25))
        prof = xray_radial_profile(ctx.pot_one, r, tol=1e-11)
        amb = radial_to_ambient(ctx.pot_one)
        for i, ri in enumerate(r):
            chart = _random_chart(rng, n, ri / 2.0)
            via_chart = -0.5 * xray_general(amb, chart, tol=1e-11)
            worst = max(worst, abs(prof.g_values[i] - via_chart) / abs(via_chart))
    return worst < 1e-8, f"max relative route difference = {worst:.3e} (tol 1e-8)"


def a3_free_shifts(ctx: AcceptanceContext):
    """V = 0 gives vanishing relative shifts for k <= 2 lam (n = 1, 2)."""
    zero = make_potential("zero")
    worst = 0.0
    for n in (1, 2):
        for lam in (50.0, 100.0):
            spec = ctx.spectrum(f"zero-n{n}", lam, int(2 * lam), zero, n)
            worst = max(worst, float(np.max(np.abs(spec.deltas))))
    return worst < 1e-6, f"max |delta_k| = {worst:.3e} for V=0 (tol 1e-6)"


def a4_unitarity(ctx: AcceptanceContext):
    """|a_+/a_-| = 1 for every mode k <= 200 at lam = 100."""
    worst = 0.0
    for k in range(0, 201):
        cc = connection_coefficients(k, 100.0, ctx.pot_one, 1, tol=1e-9)
        worst = max(worst, abs(abs(cc.a_plus / cc.a_minus) - 1.0))
    return worst < 1e-6, f"max ||a_+/a_-| - 1| = {worst:.3e} over k <= 200 (tol 1e-6)"


def a5_symbol_law(ctx: AcceptanceContext):
    """max_{k<=lam} |lam delta_k - G(k/lam)| contracts by 0.6 per doubling."""
    errs = {}
    for lam, kmax in ((50.0, 50), (100.0, 200), (200.0, 200)):
        spec = ctx.spectrum("one-n1", lam, kmax, ctx.pot_one, 1)
        ks = np.arange(0, int(lam) + 1)
        prof = xray_radial_profile(ctx.pot_one, ks / lam, tol=1e-10)
        errs[lam] = float(np.max(np.abs(lam * spec.deltas[ks] - prof.g_values)))
    ok = errs[100.0] <= 0.6 * errs[50.0] and errs[200.0] <= 0.6 * errs[100.0]
    detail = (f"E(50)={errs[50.0]:.3e}, E(100)={errs[100.0]:.3e}, "
              f"E(200)={errs[200.0]:.3e} (ratios <= 0.6)")
    return ok, detail


def _a6_data(ctx: AcceptanceContext):
    pot = ctx.pot_half
    r_grid = np.concatenate([np.linspace(0.0, 4.0, 201), np.geomspace(4.1, 64.0, 160)])
    prof = ctx.profile("half", pot, r_grid)
    specs = {}
    for lam in (50.0, 100.0, 200.0):
        kmax = suggest_kmax(pot, lam, 1)
        specs[lam] = ctx.spectrum("half-n1", lam, kmax, pot, 1)
    return prof, specs


def a6_trace_formula(ctx: AcceptanceContext):
    """Quantum moments match classical nu-moments; O(h)-or-better decay;
    the binomial-multiplicity negative control must fail."""
    prof, specs = _a6_data(ctx)
    details = []
    ok = True
    errors = {1: [], 2: []}
    for p in (1, 2):
        classical = classical_nu_integral(prof, lambda t: t ** p, 1, tol=1e-9, p=p)
        for lam, spec in specs.items():
            quantum = mu_h_pairing(spec, lambda t: t ** p)
            rel = abs(quantum - classical) / abs(classical)
            errors[p].append((1.0 / lam, abs(quantum - classical)))
            if lam == 200.0:
                ok &= rel <= 0.05
                details.append(f"p={p}: rel_err(200)={rel:.2e}")
    for p in (1, 2):
        hs = np.log([h for h, _ in errors[p]])
        es = np.log([max(e, 1e-300) for _, e in errors[p]])
        slope = float(np.polyfit(hs, es, 1)[0])
        ok &= slope >= 0.7
        details.append(f"p={p}: slope={slope:.2f}")
    # negative control: the binomial multiplicity k+1 must break the formula
    spec200 = specs[200.0]
    binom = spec200.ks + 1
    q_bad = float((2 * math.pi * spec200.h) *
                  np.sum(binom * (spec200.deltas / spec200.h)))
    classical1 = classical_nu_integral(prof, lambda t: t, 1, tol=1e-9, p=1)
    rel_bad = abs(q_bad - classical1) / abs(classical1)
    ok &= rel_bad > 0.05
    details.append(f"negative control rel_err={rel_bad:.2f} (must exceed 0.05)")
    return ok, "; ".join(details)


def a7_inverse_roundtrip(ctx: AcceptanceContext):
    """Forward-then-inverse recovers the potential; the synthetic pushforward
    inverts exactly."""
    # (a) profile -> potential roundtrip
    r_data = np.linspace(0.0, 16.0, 161)
    prof = xray_radial_profile(ctx.pot_one, r_data, tol=1e-9)
    rho_grid = np.arange(0.0, 8.0 + 0.05, 0.1)
    rec = potential_from_profile(prof, 1, rho_grid, reg=1e-10, tol=1e-8)
    rho_chk = np.linspace(0.0, 3.0, 301)
    err_v = float(np.max(np.abs(rec(rho_chk) - ctx.pot_one(rho_chk))))
    # (b) synthetic monotone pushforward, n = 1: nu(alpha, inf) = 4 pi (-ln a)
    def nu(alpha, beta):
        assert math.isinf(beta)
        return 4.0 * math.pi * max(-math.log(alpha), 0.0)

    levels = np.geomspace(1e-4, 0.999, 200)
    mono = profile_from_measure(nu, 1, levels)
    err_g = float(np.max(np.abs(mono.g_values - np.exp(-mono.r_grid))))
    ok = err_v <= 1e-3 and err_g <= 1e-10
    return ok, (f"roundtrip max|V_rec - V| = {err_v:.2e} on [0,3] (tol 1e-3); "
                f"pushforward inversion error = {err_g:.2e} (tol 1e-10)")


def a8_special_functions(ctx: AcceptanceContext):
    """Gamma reflection identity and unit-modulus free eigenvalues."""
    worst_gamma = 0.0
    for lam in (1.0, 5.0, 20.0):
        got = abs(np.exp(complex_log_gamma(1j * lam))) ** 2
        want = math.pi / (lam * math.sinh(math.pi * lam))
        worst_gamma = max(worst_gamma, abs(got - want) / want)
    rng = np.random.default_rng(83)
    worst_mu = 0.0
    for _ in range(100):
        k = int(rng.integers(0, 400))
        lam = float(10.0 ** rng.uniform(-1, 3))
        n = int(rng.integers(1, 4))
        worst_mu = max(worst_mu, abs(abs(free_eigenvalue_mu_k(k, lam, n).value) - 1.0))
    ok = worst_gamma < 1e-12 and worst_mu < 1e-12
    return ok, (f"|Gamma(i lam)|^2 identity rel err {worst_gamma:.2e}; "
                f"max ||mu_k|-1| = {worst_mu:.2e} (tol 1e-12)")


def a9_born_oracle(ctx: AcceptanceContext):
    """Weak-coupling shifts match the Born eigenvalues within 2% (k <= 50)."""
    lam, eps = 100.0, 1e-3
    born = born_eigenvalues_h2(50, lam, ctx.pot_one, tol=1e-5)
    pot_eps = ctx.pot_one.scaled(eps)
    spec = ctx.spectrum("eps-n1", lam, 55, pot_eps, 1, tol=1e-10)
    lam_d = lam * spec.deltas[:51] / eps
    rel = np.abs(lam_d - born) / np.abs(born)
    worst = float(rel.max())
    return worst <= 0.02, f"max rel disagreement = {worst:.3e} for k <= 50 (tol 2%)"


CRITERIA = {
    "A1": ("X-ray support cutoff", a1_xray_support),
    "A2": ("radial/general transform consistency", a2_radial_general_consistency),
    "A3": ("free phase shifts vanish", a3_free_shifts),
    "A4": ("mode unitarity", a4_unitarity),
    "A5": ("semiclassical symbol law", a5_symbol_law),
    "A6": ("trace formula + negative control", a6_trace_formula),
    "A7": ("inverse roundtrip", a7_inverse_roundtrip),
    "A8": ("special functions", a8_special_functions),
    "A9": ("Born weak-coupling oracle", a9_born_oracle),
}


def run_all(names=None, echo=None) -> list:
    """Run the requested criteria (all by default); returns CriterionResult list."""
    ctx = AcceptanceContext()
    results = []
    for name in (names or CRITERIA):
        label, fn = CRITERIA[name]
        t0 = time.time()
        passed, detail = fn(ctx)
        res = CriterionResult(name=name, passed=bool(passed), detail=detail,
                              seconds=time.time() - t0)
        results.append(res)
        if echo:
            echo(f"{name} {'PASS' if res.passed else 'FAIL'} [{res.seconds:6.1f}s] "
                 f"{label}: {res.detail}")
    return results
