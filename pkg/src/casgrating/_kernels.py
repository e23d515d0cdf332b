r"""Hot numerical kernels for the corrugation scattering solver.

Everything here works on plain float64 arrays for the canonical cosine
profile, where the depth propagation is real (phase offsets are applied
analytically one level up). A pure-numpy complex reference implementation
lives in :mod:`casgrating.grating_scatter` and cross-checks these kernels
in the test suite.

Compiled with numba when available; falls back to plain python (slow but
identical results) otherwise.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:          # pragma: no cover - numba is a hard dep in prod
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(f):
            return f

        return deco


# Dormand-Prince 5(4) tableau.
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
# b5 - b4, for the embedded error estimate (k2 weight is zero).
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0,
                                71.0 / 1920.0, -17253.0 / 339200.0,
                                22.0 / 525.0, -1.0 / 40.0)


@njit(cache=True)
def _coeff_blocks(zeta, amp, eps_m, inv_eps_m, m):
    """Toeplitz matrices [[eps]], [[eps]]^-1, [[1/eps]]^-1 at one depth.

    The metal occupies the region below the cosine surface, so the lateral
    metal fraction at height ``zeta`` is ``arccos(zeta/amp)/pi``.
    """
    s = zeta / amp
    if s > 1.0:
        s = 1.0
    elif s < -1.0:
        s = -1.0
    th = math.acos(s)
    nC = 2 * m - 1
    cof_e = np.empty(nC)
    cof_h = np.empty(nC)
    c0 = th / math.pi
    cof_e[m - 1] = 1.0 + (eps_m - 1.0) * c0
    cof_h[m - 1] = 1.0 + (inv_eps_m - 1.0) * c0
    for d in range(1, m):
        cd = math.sin(d * th) / (d * math.pi)
        cof_e[m - 1 + d] = (eps_m - 1.0) * cd
        cof_e[m - 1 - d] = cof_e[m - 1 + d]
        cof_h[m - 1 + d] = (inv_eps_m - 1.0) * cd
        cof_h[m - 1 - d] = cof_h[m - 1 + d]
    eps_t = np.empty((m, m))
    eta_t = np.empty((m, m))
    for j in range(m):
        for k in range(m):
            eps_t[j, k] = cof_e[m - 1 + j - k]
            eta_t[j, k] = cof_h[m - 1 + j - k]
    einv = np.linalg.inv(eps_t)
    hinv = np.linalg.inv(eta_t)
    return eps_t, einv, hinv


@njit(cache=True)
def _rhs(zeta, u, amp, eps_m, inv_eps_m, kcol, ky, q0):
    """Depth derivative of the transverse field stack ``u`` (4m x w).

    Rows hold (Ex, Ey, Hx, Hy) Fourier blocks. With the longitudinal
    components eliminated the system is real for the cosine profile:

        Ex' = -(1/q0) K Einv (K Hy - ky Hx) - q0 Hy
        Ey' = -(ky/q0)  Einv (K Hy - ky Hx) + q0 Hx
        Hx' =  (1/q0) K (K Ey - ky Ex) + q0 [[eps]] Ey
        Hy' =  (ky/q0)  (K Ey - ky Ex) - q0 [[1/eps]]^-1 Ex
    """
    m = kcol.shape[0]
    eps_t, einv, hinv = _coeff_blocks(zeta, amp, eps_m, inv_eps_m, m)
    ex = u[0:m]
    ey = u[m:2 * m]
    hx = u[2 * m:3 * m]
    hy = u[3 * m:4 * m]
    du = np.empty_like(u)
    combo = einv @ (kcol * hy - ky * hx)
    du[0:m] = -(kcol * combo) / q0 - q0 * hy
    du[m:2 * m] = -(ky / q0) * combo + q0 * hx
    hcombo = kcol * ey - ky * ex
    du[2 * m:3 * m] = (kcol * hcombo) / q0 + q0 * (eps_t @ ey)
    du[3 * m:4 * m] = (ky / q0) * hcombo - q0 * (hinv @ ex)
    return du


@njit(cache=True)
def _dp45_span(u, z0, z1, rtol, atol, amp, eps_m, inv_eps_m, kcol, ky, q0,
               max_steps):
    """Advance ``u`` in place from z0 to z1 (either direction);
    returns 0 on success."""
    span = z1 - z0
    sgn = 1.0 if span >= 0.0 else -1.0
    t = z0
    h = span / 16.0
    k1 = _rhs(t, u, amp, eps_m, inv_eps_m, kcol, ky, q0)
    steps = 0
    while (z1 - t) * sgn > 1e-14 * abs(span):
        if (t + h - z1) * sgn > 0.0:
            h = z1 - t
        y2 = u + h * (_A21 * k1)
        k2 = _rhs(t + _C2 * h, y2, amp, eps_m, inv_eps_m, kcol, ky, q0)
        y3 = u + h * (_A31 * k1 + _A32 * k2)
        k3 = _rhs(t + _C3 * h, y3, amp, eps_m, inv_eps_m, kcol, ky, q0)
        y4 = u + h * (_A41 * k1 + _A42 * k2 + _A43 * k3)
        k4 = _rhs(t + _C4 * h, y4, amp, eps_m, inv_eps_m, kcol, ky, q0)
        y5 = u + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4)
        k5 = _rhs(t + _C5 * h, y5, amp, eps_m, inv_eps_m, kcol, ky, q0)
        y6 = u + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4
                      + _A65 * k5)
        k6 = _rhs(t + h, y6, amp, eps_m, inv_eps_m, kcol, ky, q0)
        y7 = u + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = _rhs(t + h, y7, amp, eps_m, inv_eps_m, kcol, ky, q0)

        # scaled RMS of the embedded 4th/5th order difference
        nrm = 0.0
        n_r, n_c = u.shape
        for i in range(n_r):
            for j in range(n_c):
                e = h * (_E1 * k1[i, j] + _E3 * k3[i, j] + _E4 * k4[i, j]
                         + _E5 * k5[i, j] + _E6 * k6[i, j]
                         + _E7 * k7[i, j])
                a = abs(u[i, j])
                b = abs(y7[i, j])
                sc = atol + rtol * (a if a > b else b)
                r = e / sc
                nrm += r * r
        nrm = math.sqrt(nrm / (n_r * n_c))

        if nrm <= 1.0:
            t += h
            u[:, :] = y7
            k1 = k7
        fac = 2.0 if nrm <= 0.0 else 0.9 * nrm ** -0.2
        if fac < 0.2:
            fac = 0.2
        elif fac > 5.0:
            fac = 5.0
        h *= fac
        if abs(h) < 1e-13 * abs(span):
            return 1
        steps += 1
        if steps > max_steps:
            return 2
    return 0


@njit(cache=True)
def _mode_columns(kvec, ky, q0, eps, sigma):
    """Unnormalized (ex, ey, hx, hy) mode components in a uniform medium.

    Column families: E-pol (ey-driven) and H-pol (hy-driven), one per
    Fourier order, decay direction ``sigma`` (+1 decays downward).
    Returns (vE 4 x m, vH 4 x m, kappa m).
    """
    m = kvec.shape[0]
    v_e = np.zeros((4, m))
    v_h = np.zeros((4, m))
    kap = np.empty(m)
    for i in range(m):
        kap[i] = math.sqrt(kvec[i] * kvec[i] + ky * ky + eps * q0 * q0)
        denom = ky * ky + eps * q0 * q0
        v_e[0, i] = kvec[i] * ky
        v_e[1, i] = denom
        v_e[2, i] = sigma * q0 * eps * kap[i]
        v_h[0, i] = -sigma * q0 * kap[i]
        v_h[2, i] = kvec[i] * ky
        v_h[3, i] = denom
    return v_e, v_h, kap


@njit(cache=True)
def _fill_columns(p, col0, v_e, v_h, m):
    """Place E-pol then H-pol mode columns (normalized) into ``p``."""
    for i in range(m):
        ne = math.sqrt(v_e[0, i] ** 2 + v_e[1, i] ** 2 + v_e[2, i] ** 2
                       + v_e[3, i] ** 2)
        nh = math.sqrt(v_h[0, i] ** 2 + v_h[1, i] ** 2 + v_h[2, i] ** 2
                       + v_h[3, i] ** 2)
        for r in range(4):
            p[r * m + i, col0 + i] = v_e[r, i] / ne
            p[r * m + i, col0 + m + i] = v_h[r, i] / nh


@njit(cache=True)
def _reflection_core(amp, period, eps_m, kx, ky, q0, n_ord, rtol, atol,
                     efolds, max_steps):
    """Crest-referenced reflection matrix of one corrugated mirror.

    Returns ``(r, kappa, status)`` where ``r`` is 2m x 2m (E-pol block
    first), ``kappa`` the vacuum decay constants per order, and status 0
    on success (1: step underflow, 2: step budget, 3: singular algebra).
    """
    m = 2 * n_ord + 1
    kvec = np.empty(m)
    for i in range(m):
        kvec[i] = kx + 2.0 * math.pi * (i - n_ord) / period
    inv_eps_m = 1.0 / eps_m

    p = np.zeros((4 * m, 4 * m))
    v_e, v_h, kap_v = _mode_columns(kvec, ky, q0, 1.0, 1.0)
    _fill_columns(p, 0, v_e, v_h, m)
    v_e, v_h, _ = _mode_columns(kvec, ky, q0, 1.0, -1.0)
    _fill_columns(p, 2 * m, v_e, v_h, m)

    pm = np.zeros((4 * m, 2 * m))
    v_e, v_h, kap_m = _mode_columns(kvec, ky, q0, eps_m, 1.0)
    _fill_columns(pm, 0, v_e, v_h, m)

    two = 2 * m
    s_dd = np.eye(two)
    s_du = np.zeros((two, two))
    s_ud = np.zeros((two, two))
    s_uu = np.eye(two)

    if amp > 0.0:
        kmax = kap_m[0]
        for i in range(m):
            if kap_m[i] > kmax:
                kmax = kap_m[i]
        n_sub = int(math.ceil(2.0 * amp * kmax / efolds))
        if n_sub < 1:
            n_sub = 1
        kcol = kvec.copy().reshape((m, 1))
        eye4 = np.eye(4 * m)
        for i_sub in range(n_sub):
            za = -amp + 2.0 * amp * i_sub / n_sub
            zb = -amp + 2.0 * amp * (i_sub + 1) / n_sub
            u = eye4.copy()
            st = _dp45_span(u, za, zb, rtol, atol, amp, eps_m, inv_eps_m,
                            kcol, ky, q0, max_steps)
            if st != 0:
                return s_dd, kap_v, st
            t_amp = np.linalg.solve(p, u @ p)
            t11 = np.ascontiguousarray(t_amp[:two, :two])
            t12 = np.ascontiguousarray(t_amp[:two, two:])
            t21 = np.ascontiguousarray(t_amp[two:, :two])
            t22 = np.ascontiguousarray(t_amp[two:, two:])
            n_dd = np.linalg.inv(t11)
            n_du = -(n_dd @ t12)
            n_ud = t21 @ n_dd
            n_uu = t22 + t21 @ n_du
            # Redheffer star: accumulated (lower) * new substep (upper)
            x = np.linalg.inv(np.eye(two) - n_du @ s_ud)
            c_dd = s_dd @ x @ n_dd
            c_du = s_du + s_dd @ x @ n_du @ s_uu
            c_ud = n_ud + n_uu @ s_ud @ x @ n_dd
            c_uu = n_uu @ s_uu + n_uu @ s_ud @ x @ n_du @ s_uu
            s_dd, s_du, s_ud, s_uu = c_dd, c_du, c_ud, c_uu

    g = np.linalg.solve(p, pm)
    g_d = np.ascontiguousarray(g[:two, :])
    g_u = np.ascontiguousarray(g[two:, :])
    core = g_d - s_du @ g_u
    r = s_ud + s_uu @ g_u @ np.linalg.solve(core, s_dd)
    return r, kap_v, 0


@njit(cache=True)
def _propagate_span(u, z_from, z_to, amp, period, eps_m, kx, ky, q0, n_ord,
                    rtol, atol, max_steps):
    """Single-span field propagation used by the public map builder."""
    m = 2 * n_ord + 1
    kvec = np.empty(m)
    for i in range(m):
        kvec[i] = kx + 2.0 * math.pi * (i - n_ord) / period
    kcol = kvec.copy().reshape((m, 1))
    return _dp45_span(u, z_from, z_to, rtol, atol, amp, eps_m, 1.0 / eps_m,
                      kcol, ky, q0, max_steps)
