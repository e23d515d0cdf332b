r"""Specular and diffractive reflection from a sinusoidally corrugated
metal mirror at imaginary frequency.

Geometry: the mirror surface is ``z = h(x) = A sin(2 pi x / period + chi)``
with metal filling the half-space below. Transverse Fourier components
``k_n = kx + 2 pi n / period`` couple through the corrugation region
``|z| <= A``, where the fields are advanced depth by depth with a
stabilized scattering-matrix recursion; outside, Rayleigh bases of
exponential modes apply.

Conventions
-----------
* Basis slots are ``(pol, order)`` with the E-polarized block (driven by
  ``E_y``) first, orders ``-N..N`` inside each block.
* Amplitudes are referenced at the crest plane ``z = +A``: incoming modes
  decay downward like ``exp(+kappa_n (z - A))``, outgoing ones decay
  upward like ``exp(-kappa_n (z - A))``. Entries are then O(1); the
  mean-plane convention differs by the diagonal similarity
  ``diag(exp(-kappa_n A))`` on both sides, which leaves every scattering
  determinant built from two mirrors unchanged.
* A lateral shift of the profile phase ``chi -> chi + delta`` multiplies
  entries by ``exp(i (n - n') delta)``; :func:`shift_phase` applies this
  exactly, and the production path uses it to reduce every solve to the
  real-valued cosine profile (``chi = pi/2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .constants import HBAR_C
from .errors import PropagationError
from .materials import IdealMetal, eps_imag
from .numerics import NumericsConfig

_STATUS_MSG = {
    1: "step size underflow",
    2: "step budget exhausted",
}

_MAX_STEPS = 20000


@dataclass(frozen=True)
class GratingProfile:
    """Sinusoidal corrugation ``h(x) = amplitude sin(2 pi x/period + phase)``.

    ``material`` fills the region below the surface; lengths in nm.
    """

    period: float
    amplitude: float
    material: object
    phase: float = 0.0

    def __post_init__(self):
        if self.period <= 0.0:
            raise ValueError(f"period must be positive, got {self.period}")
        if self.amplitude < 0.0:
            raise ValueError(
                f"amplitude must be non-negative, got {self.amplitude}")


def default_orders(profile):
    """Starting Fourier truncation for a profile (auto-N refines it)."""
    slope = 2.0 * math.pi * profile.amplitude / profile.period
    return max(6, int(math.ceil(4.0 * slope)) + 2)


@dataclass(frozen=True)
class OdeSystem:
    """Depth-propagation system for one corrugated mirror at fixed
    ``(xi, kx, ky)``; matrix blocks of size ``2 n_orders + 1``."""

    profile: GratingProfile
    xi: float
    kx: float
    ky: float
    n_orders: int
    rtol: float = 1e-9
    atol: float = 1e-12

    def __post_init__(self):
        if self.xi <= 0.0:
            raise ValueError("xi must be positive (static terms are "
                             "evaluated by the engines at a surrogate xi)")
        if self.n_orders < 1:
            raise ValueError("n_orders must be >= 1")

    @property
    def dimension(self):
        """State dimension 4(2N+1)."""
        return 4 * (2 * self.n_orders + 1)

    @property
    def q0(self):
        return self.xi / HBAR_C

    @property
    def eps(self):
        return eps_imag(self.profile.material, self.xi)

    def coefficient_matrix(self, depth):
        """Dense system matrix A(depth) with u' = A u (canonical phase)."""
        amp = self.profile.amplitude
        if amp == 0.0:
            raise ValueError("flat profile has a zero-thickness "
                             "corrugation region")
        m = 2 * self.n_orders + 1
        kvec = self.kx + 2.0 * math.pi * np.arange(-self.n_orders,
                                                   self.n_orders + 1) \
            / self.profile.period
        kcol = np.ascontiguousarray(kvec.reshape(m, 1))
        return _kernels._rhs(float(depth), np.eye(4 * m), amp, self.eps,
                             1.0 / self.eps, kcol, self.ky, self.q0)


def propagate_fields(system, from_depth, to_depth):
    """Linear map of transverse fields from one depth to another.

    Integrates the full fundamental matrix in one span; no scattering
    stabilization is applied, so over many decay lengths the map is
    exponentially ill-conditioned (use the reflection solver for physical
    quantities). ``from_depth == to_depth`` returns the identity.
    """
    m = 2 * system.n_orders + 1
    if from_depth == to_depth:
        return np.eye(4 * m)
    amp = system.profile.amplitude
    if amp == 0.0:
        raise ValueError("flat profile: only the degenerate zero-span map "
                         "(identity) exists")
    u = np.eye(4 * m)
    status = _kernels._propagate_span(
        u, float(from_depth), float(to_depth), amp, system.profile.period,
        system.eps, system.kx, system.ky, system.q0, system.n_orders,
        system.rtol, system.atol, _MAX_STEPS)
    if status != 0:
        raise PropagationError(
            f"propagation failed ({_STATUS_MSG.get(status, status)}) at "
            f"xi={system.xi:.6g}, kx={system.kx:.6g}, ky={system.ky:.6g}")
    return u


@dataclass(frozen=True)
class ReflectionMatrix:
    """Reflection operator of one mirror in the two-polarization Fourier
    basis, crest-plane referenced (see module docstring).

    Attributes
    ----------
    matrix : ndarray
        Complex array of shape ``(2(2N+1), 2(2N+1))``.
    kappa : ndarray
        Vacuum decay constants ``sqrt(k_n^2 + ky^2 + (xi/hbar c)^2)``.
    """

    matrix: np.ndarray
    n_orders: int
    xi: float
    kx: float
    ky: float
    period: float
    amplitude: float
    kappa: np.ndarray

    @property
    def order_index(self):
        """Order labels per basis slot (length 2(2N+1))."""
        n = np.arange(-self.n_orders, self.n_orders + 1)
        return np.concatenate([n, n])

    def labels(self):
        n = np.arange(-self.n_orders, self.n_orders + 1)
        return ([f"{i}:E" for i in n] + [f"{i}:H" for i in n])

    def write_debug_csv(self, path):
        """Dump the matrix with ``order:polarization`` row/col labels."""
        lab = self.labels()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# reflection matrix, crest-plane referenced\n")
            fh.write(f"# xi_eV={self.xi:.17g} kx={self.kx:.17g} "
                     f"ky={self.ky:.17g} period={self.period:.17g} "
                     f"amplitude={self.amplitude:.17g}\n")
            fh.write("slot," + ",".join(lab) + "\n")
            for i, row in enumerate(self.matrix):
                cells = ",".join(
                    f"{v.real:.17g}{v.imag:+.17g}j" for v in row)
                fh.write(f"{lab[i]},{cells}\n")


def shift_phase(refl, delta):
    """Reflection matrix of the laterally shifted profile
    (``chi -> chi + delta``): entries pick up ``exp(i (n - n') delta)``."""
    ph = np.exp(1j * refl.order_index * float(delta))
    mat = (ph[:, None] * refl.matrix) * ph.conj()[None, :]
    return ReflectionMatrix(matrix=mat, n_orders=refl.n_orders, xi=refl.xi,
                            kx=refl.kx, ky=refl.ky, period=refl.period,
                            amplitude=refl.amplitude, kappa=refl.kappa)


def reflection_matrix(profile, xi, kx, ky, config=None):
    """Reflection matrix of a corrugated mirror at ``(xi, kx, ky)``.

    Parameters
    ----------
    profile : GratingProfile
    xi : float
        Imaginary frequency in eV, positive.
    kx, ky : float
        Bloch momentum along the corrugation and transverse momentum, 1/nm.
    config : NumericsConfig, optional
        ``n_orders`` (or the profile default), ODE tolerances and the
        substep budget are taken from here.

    Returns
    -------
    ReflectionMatrix
    """
    config = config or NumericsConfig()
    n_ord = config.n_orders or default_orders(profile)
    if isinstance(profile.material, IdealMetal):
        raise ValueError("corrugation solver needs a finite-permittivity "
                         "material model")
    if xi <= 0.0:
        raise ValueError("xi must be positive")
    q0 = xi / HBAR_C
    eps = eps_imag(profile.material, xi)

    if config.phase_fastpath:
        r, kap, status = _kernels._reflection_core(
            profile.amplitude, profile.period, eps, kx, ky, q0, n_ord,
            config.ode_rtol, config.ode_atol, config.substep_efolds,
            _MAX_STEPS)
        if status != 0:
            raise PropagationError(
                f"reflection solve failed "
                f"({_STATUS_MSG.get(status, status)}) at xi={xi:.6g}, "
                f"kx={kx:.6g}, ky={ky:.6g}")
        base = ReflectionMatrix(
            matrix=r.astype(np.complex128), n_orders=n_ord, xi=xi, kx=kx,
            ky=ky, period=profile.period, amplitude=profile.amplitude,
            kappa=kap)
        if profile.phase == 0.5 * math.pi:
            return base
        return shift_phase(base, profile.phase - 0.5 * math.pi)

    r, kap = _reflection_reference(profile, xi, kx, ky, n_ord, config)
    return ReflectionMatrix(matrix=r, n_orders=n_ord, xi=xi, kx=kx, ky=ky,
                            period=profile.period,
                            amplitude=profile.amplitude, kappa=kap)


# ----------------------------------------------------------------------
# reference implementation: direct complex solve at arbitrary phase
# ----------------------------------------------------------------------

def _toeplitz_general(zeta, amp, psi, eps, m):
    """[[eps]], [[eps]]^-1, [[1/eps]]^-1 at depth zeta, profile
    ``A cos(theta - psi)`` (complex for psi != 0)."""
    s = np.clip(zeta / amp, -1.0, 1.0)
    th = math.acos(s)
    d = np.arange(1, m)
    c = np.empty(2 * m - 1, dtype=complex)
    c[m - 1] = th / math.pi
    pos = np.sin(d * th) / (d * math.pi) * np.exp(-1j * d * psi)
    c[m:] = pos
    c[m - 2::-1] = np.conj(pos)
    idx = np.arange(m)
    toe = idx[:, None] - idx[None, :] + (m - 1)
    eps_t = np.where(toe == m - 1, 1.0, 0.0) + (eps - 1.0) * c[toe]
    eta_t = np.where(toe == m - 1, 1.0, 0.0) + (1.0 / eps - 1.0) * c[toe]
    return eps_t, np.linalg.inv(eps_t), np.linalg.inv(eta_t)


def _reference_rhs(zeta, u, amp, psi, eps, kvec, ky, q0):
    m = kvec.shape[0]
    eps_t, einv, hinv = _toeplitz_general(zeta, amp, psi, eps, m)
    kcol = kvec[:, None]
    ex, ey = u[0:m], u[m:2 * m]
    hx, hy = u[2 * m:3 * m], u[3 * m:4 * m]
    du = np.empty_like(u)
    combo = einv @ (kcol * hy - ky * hx)
    du[0:m] = -(kcol * combo) / q0 - q0 * hy
    du[m:2 * m] = -(ky / q0) * combo + q0 * hx
    hcombo = kcol * ey - ky * ex
    du[2 * m:3 * m] = (kcol * hcombo) / q0 + q0 * (eps_t @ ey)
    du[3 * m:4 * m] = (ky / q0) * hcombo - q0 * (hinv @ ex)
    return du


def _reference_basis(kvec, ky, q0, eps, sigma):
    m = kvec.shape[0]
    kap = np.sqrt(kvec ** 2 + ky ** 2 + eps * q0 ** 2)
    cols = np.zeros((4 * m, 2 * m), dtype=complex)
    denom = ky ** 2 + eps * q0 ** 2
    idx = np.arange(m)
    v_e = np.zeros((4, m))
    v_e[0] = kvec * ky
    v_e[1] = denom
    v_e[2] = sigma * q0 * eps * kap
    v_h = np.zeros((4, m))
    v_h[0] = -sigma * q0 * kap
    v_h[2] = kvec * ky
    v_h[3] = denom
    v_e /= np.linalg.norm(v_e, axis=0)
    v_h /= np.linalg.norm(v_h, axis=0)
    for r in range(4):
        cols[r * m + idx, idx] = v_e[r]
        cols[r * m + idx, m + idx] = v_h[r]
    return cols, kap


def _reference_basis_pair(kvec, ky, q0):
    down, kap = _reference_basis(kvec, ky, q0, 1.0, +1.0)
    up, _ = _reference_basis(kvec, ky, q0, 1.0, -1.0)
    return np.hstack([down, up]), kap


def _reflection_reference(profile, xi, kx, ky, n_ord, config):
    """Direct complex-valued solve (scipy integrator), any profile phase.

    Slow; exists as the independent cross-check of the production path.
    """
    from scipy.integrate import solve_ivp

    m = 2 * n_ord + 1
    q0 = xi / HBAR_C
    eps = eps_imag(profile.material, xi)
    kvec = kx + 2.0 * math.pi * np.arange(-n_ord, n_ord + 1) \
        / profile.period
    amp = profile.amplitude
    psi = 0.5 * math.pi - profile.phase

    p, kap_v = _reference_basis_pair(kvec, ky, q0)
    pm, kap_m = _reference_basis(kvec, ky, q0, eps, +1.0)
    two = 2 * m
    s_dd = np.eye(two, dtype=complex)
    s_du = np.zeros((two, two), dtype=complex)
    s_ud = np.zeros((two, two), dtype=complex)
    s_uu = np.eye(two, dtype=complex)

    if amp > 0.0:
        n_sub = max(1, math.ceil(2.0 * amp * kap_m.max()
                                 / config.substep_efolds))
        edges = np.linspace(-amp, amp, n_sub + 1)

        def rhs_flat(z, y):
            u = y.view(complex).reshape(4 * m, 4 * m)
            return _reference_rhs(z, u, amp, psi, eps, kvec, ky,
                                  q0).ravel().view(float)

        for za, zb in zip(edges[:-1], edges[1:]):
            y0 = np.eye(4 * m, dtype=complex).ravel().view(float)
            sol = solve_ivp(rhs_flat, (za, zb), y0, method="DOP853",
                            rtol=min(config.ode_rtol, 1e-10), atol=1e-13)
            if not sol.success:
                raise PropagationError(f"reference solve failed: "
                                       f"{sol.message}")
            u = sol.y[:, -1].view(complex).reshape(4 * m, 4 * m)
            t_amp = np.linalg.solve(p, u @ p)
            t11, t12 = t_amp[:two, :two], t_amp[:two, two:]
            t21, t22 = t_amp[two:, :two], t_amp[two:, two:]
            n_dd = np.linalg.inv(t11)
            n_du = -(n_dd @ t12)
            n_ud = t21 @ n_dd
            n_uu = t22 + t21 @ n_du
            x = np.linalg.inv(np.eye(two) - n_du @ s_ud)
            s_dd, s_du, s_ud, s_uu = (
                s_dd @ x @ n_dd,
                s_du + s_dd @ x @ n_du @ s_uu,
                n_ud + n_uu @ s_ud @ x @ n_dd,
                n_uu @ s_uu + n_uu @ s_ud @ x @ n_du @ s_uu,
            )

    g = np.linalg.solve(p, pm.astype(complex))
    g_d, g_u = g[:two], g[two:]
    r = s_ud + s_uu @ g_u @ np.linalg.solve(g_d - s_du @ g_u, s_dd)
    return r, kap_v
