"""Compiled core for the radial mode ODE  v'' = (Q_k(rho) - lam^2) v.

Each harmonic degree k is an independent scalar two-point integration from a
regular seed near the origin (or a recessive WKB seed inside the centrifugal
barrier for large k) out to the matching radii.  The marcher is an adaptive
embedded Dormand-Prince 5(4) pair with standard step control, renormalizing
the solution scale inside the barrier to avoid overflow; the equation is
linear, so the overall scale is immaterial and the accumulated log-scale is
reported per stop.

The potential enters through precomputed cubic-spline coefficients on a
uniform rho grid, so any radial profile is supported inside the jitted code.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

# WKB seeding threshold on the Frobenius index alpha = k + n/2
ALPHA_WKB = 60.0
RENORM_LIMIT = 1e100
MIN_STEP = 1e-13
MAX_STEPS = 50_000_000

STATUS_OK = 0
STATUS_STIFF = -1
STATUS_STEPCAP = -2


@njit(cache=True)
def _spline_eval(x, x0, dx, coef):
    nseg = coef.shape[1]
    i = int((x - x0) / dx)
    if i < 0:
        i = 0
    elif i >= nseg:
        i = nseg - 1
    t = x - (x0 + i * dx)
    return ((coef[0, i] * t + coef[1, i]) * t + coef[2, i]) * t + coef[3, i]


@njit(cache=True)
def _q_minus_e(rho, c, lam2, x0, dx, coef, has_v):
    s = np.sinh(rho)
    q = c / (s * s)
    if has_v:
        q += _spline_eval(rho, x0, dx, coef)
    return q - lam2


@njit(cache=True)
def _march(rho, v, vp, rho_stops, c, lam2, x0, dx, coef, has_v, rtol, out):
    """Advance (v, vp) through every stop; fill out[(stop), (v, vp, logscale)]."""
    a21 = 1.0 / 5.0
    a31 = 3.0 / 40.0; a32 = 9.0 / 40.0
    a41 = 44.0 / 45.0; a42 = -56.0 / 15.0; a43 = 32.0 / 9.0
    a51 = 19372.0 / 6561.0; a52 = -25360.0 / 2187.0
    a53 = 64448.0 / 6561.0; a54 = -212.0 / 729.0
    a61 = 9017.0 / 3168.0; a62 = -355.0 / 33.0; a63 = 46732.0 / 5247.0
    a64 = 49.0 / 176.0; a65 = -5103.0 / 18656.0
    b1 = 35.0 / 384.0; b3 = 500.0 / 1113.0; b4 = 125.0 / 192.0
    b5 = -2187.0 / 6784.0; b6 = 11.0 / 84.0
    e1 = 71.0 / 57600.0; e3 = -71.0 / 16695.0; e4 = 71.0 / 1920.0
    e5 = -17253.0 / 339200.0; e6 = 22.0 / 525.0; e7 = -1.0 / 40.0

    log_scale = 0.0
    k1v = vp
    k1p = _q_minus_e(rho, c, lam2, x0, dx, coef, has_v) * v
    h = 1e-4
    if h > 0.05 / np.sqrt(lam2):
        h = 0.05 / np.sqrt(lam2)
    nstop = 0
    steps = 0
    while nstop < rho_stops.size:
        steps += 1
        if steps > MAX_STEPS:
            return STATUS_STEPCAP
        target = rho_stops[nstop]
        hit = False
        if rho + h >= target:
            h = target - rho
            hit = True
        r2 = rho + a21 * h
        y2 = v + h * a21 * k1v
        p2 = vp + h * a21 * k1p
        k2v = p2
        k2p = _q_minus_e(r2, c, lam2, x0, dx, coef, has_v) * y2
        r3 = rho + 0.3 * h
        y3 = v + h * (a31 * k1v + a32 * k2v)
        p3 = vp + h * (a31 * k1p + a32 * k2p)
        k3v = p3
        k3p = _q_minus_e(r3, c, lam2, x0, dx, coef, has_v) * y3
        r4 = rho + 0.8 * h
        y4 = v + h * (a41 * k1v + a42 * k2v + a43 * k3v)
        p4 = vp + h * (a41 * k1p + a42 * k2p + a43 * k3p)
        k4v = p4
        k4p = _q_minus_e(r4, c, lam2, x0, dx, coef, has_v) * y4
        r5 = rho + (8.0 / 9.0) * h
        y5 = v + h * (a51 * k1v + a52 * k2v + a53 * k3v + a54 * k4v)
        p5 = vp + h * (a51 * k1p + a52 * k2p + a53 * k3p + a54 * k4p)
        k5v = p5
        k5p = _q_minus_e(r5, c, lam2, x0, dx, coef, has_v) * y5
        r6 = rho + h
        y6 = v + h * (a61 * k1v + a62 * k2v + a63 * k3v + a64 * k4v + a65 * k5v)
        p6 = vp + h * (a61 * k1p + a62 * k2p + a63 * k3p + a64 * k4p + a65 * k5p)
        k6v = p6
        k6p = _q_minus_e(r6, c, lam2, x0, dx, coef, has_v) * y6
        vn = v + h * (b1 * k1v + b3 * k3v + b4 * k4v + b5 * k5v + b6 * k6v)
        vpn = vp + h * (b1 * k1p + b3 * k3p + b4 * k4p + b5 * k5p + b6 * k6p)
        k7v = vpn
        k7p = _q_minus_e(r6, c, lam2, x0, dx, coef, has_v) * vn
        errv = h * (e1 * k1v + e3 * k3v + e4 * k4v + e5 * k5v + e6 * k6v + e7 * k7v)
        errp = h * (e1 * k1p + e3 * k3p + e4 * k4p + e5 * k5p + e6 * k6p + e7 * k7p)
        sv = abs(v)
        if abs(vn) > sv:
            sv = abs(vn)
        sp = abs(vp)
        if abs(vpn) > sp:
            sp = abs(vpn)
        sc_v = 1e-250 + rtol * sv
        sc_p = 1e-250 + rtol * sp
        ev = errv / sc_v
        ep = errp / sc_p
        err = np.sqrt(0.5 * (ev * ev + ep * ep))
        if err <= 1.0:
            rho = rho + h
            v = vn
            vp = vpn
            k1v = k7v
            k1p = k7p
            if hit:
                out[nstop, 0] = v
                out[nstop, 1] = vp
                out[nstop, 2] = log_scale
                nstop += 1
            m = abs(v)
            if abs(vp) > m:
                m = abs(vp)
            if m > RENORM_LIMIT:
                v /= m
                vp /= m
                k1v /= m
                k1p /= m
                log_scale += np.log(m)
        if err > 0.0:
            fac = 0.9 * err ** (-0.2)
        else:
            fac = 5.0
        if fac > 5.0:
            fac = 5.0
        elif fac < 0.2:
            fac = 0.2
        h *= fac
        if h < MIN_STEP:
            return STATUS_STIFF
    return STATUS_OK


@njit(cache=True)
def _seed(k, n, lam, c, x0, dx, coef, has_v, rho0_user):
    """Choose (rho_start, v, vp) for the regular solution of degree k."""
    alpha = k + n / 2.0
    lam2 = lam * lam
    if alpha <= ALPHA_WKB or rho0_user > 0.0:
        rho0 = rho0_user if rho0_user > 0.0 else min(0.01, 1e-3 / lam)
        v0 = 0.0
        if has_v:
            v0 = _spline_eval(0.0, x0, dx, coef)
        b = (v0 - lam2 - alpha * (alpha - 1.0) / 3.0) / (4.0 * alpha + 2.0)
        return rho0, 1.0 + b * rho0 * rho0, alpha / rho0 + (alpha + 2.0) * b * rho0
    nu = np.sqrt(c)
    rho0 = np.arcsinh(nu / (3.0 * lam))
    if rho0 < 1e-3:
        rho0 = 1e-3
    qt = _q_minus_e(rho0, c, lam2, x0, dx, coef, has_v)
    s = np.sinh(rho0)
    dqt = -2.0 * c * np.cosh(rho0) / (s * s * s)
    return rho0, 1.0, np.sqrt(qt) - dqt / (4.0 * qt)


@njit(cache=True, parallel=True)
def solve_batch(ks, n, lam, rho_stops, x0, dx, coef, has_v, rtol):
    """Regular solutions for every degree in ``ks`` at every stop.

    Returns (res, status): res[i, j] = (v, v', log_scale) for degree ks[i] at
    rho_stops[j]; status[i] is a STATUS_* code.
    """
    res = np.empty((ks.size, rho_stops.size, 3))
    status = np.zeros(ks.size, dtype=np.int64)
    for i in prange(ks.size):
        k = ks[i]
        c = k * (k + n - 1.0) + n * (n - 2.0) / 4.0
        rho0, v0, vp0 = _seed(k, n, lam, c, x0, dx, coef, has_v, -1.0)
        status[i] = _march(rho0, v0, vp0, rho_stops, c, lam * lam,
                           x0, dx, coef, has_v, rtol, res[i])
    return res, status


@njit(cache=True)
def solve_single(k, n, lam, rho_stops, x0, dx, coef, has_v, rtol, rho0_user):
    res = np.empty((rho_stops.size, 3))
    c = k * (k + n - 1.0) + n * (n - 2.0) / 4.0
    rho0, v0, vp0 = _seed(k, n, lam, c, x0, dx, coef, has_v, rho0_user)
    status = _march(rho0, v0, vp0, rho_stops, c, lam * lam,
                    x0, dx, coef, has_v, rtol, res)
    return res, status
