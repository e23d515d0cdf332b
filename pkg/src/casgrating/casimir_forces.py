r"""Casimir energy and lateral force between a corrugated plate and a
sphere carrying a sinusoidal imprint of the same period.

Scattering form
---------------
Both surfaces are described by crest-referenced reflection operators
``R1``, ``R2`` (see :mod:`casgrating.grating_scatter`). Per Matsubara
frequency and Bloch momentum the round-trip operator across the surface
gap ``g(z') = z' - A1 - A2`` is

.. math::

    \mathcal{M}(\varphi) = R_1 \, D \, Q_\Delta R_2 Q_\Delta^\dagger \, D,
    \qquad D = \mathrm{diag}\, e^{-\kappa_n g},

with the order-phase ``(Q_\Delta)_n = e^{i n \Delta}`` carrying the whole
lateral offset, ``\Delta = (chi_2 + \varphi) + \pi - chi_1``. The pi
accounts for the frame flip of the downward-facing imprint. The area
energy density is

.. math::

    \mathcal{E}(z', \varphi) = \frac{k_B T}{\pi^2}
        \sideset{}{'}\sum_l \int_0^{\pi/\Lambda}\!\! dk_x
        \int_0^{\infty}\!\! dk_y\, \mathrm{Re}\ln\det
        \left[1 - \mathcal{M}\right],

where folding the full momentum plane onto the quarter domain is exact:
``k_x -> -k_x`` conjugates the determinant and ``k_y -> -k_y`` is a real
similarity. The sphere curvature enters through the proximity integral
over the mean-plane separation,

.. math::

    F_{\rm lat}(z, \varphi) = -\frac{2\pi}{\Lambda}
        \frac{\partial}{\partial\varphi}\, 2\pi R \int_z^\infty
        \mathcal{E}(z', \varphi)\, dz',

and the phase derivative is taken analytically,
``d ln det / d phi = -tr[(1-M)^{-1} dM/dphi]`` with
``(dM/dphi)_{nn'} propto i(n - n')``. Energies are therefore even and
forces odd in ``phi`` to machine precision by construction, with zeros
at ``phi = 0, pi``.
"""

from __future__ import annotations

import hashlib
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .constants import (EV_PER_NM2_TO_J_M2, EV_PER_NM_TO_N, HBAR_C, KB,
                        matsubara_xi)
from .errors import ConvergenceError, PropagationError
from .grating_scatter import GratingProfile, default_orders
from .lifshitz import PlateEnergyInterpolator, free_energy_ev_nm2
from .materials import eps_imag
from .numerics import NumericsConfig, gauss_nodes, semi_infinite_nodes, \
    shanks_limit, zprime_nodes

_MAX_STEPS = 20000
_STATUS_MSG = {1: "step size underflow", 2: "step budget exhausted"}


@dataclass(frozen=True)
class SphereGratingGeometry:
    """Sphere with a sinusoidal imprint above a corrugated plate.

    ``separation`` is the mean-plane distance ``z``; ``phase`` is the
    lateral offset ``phi`` added to the imprint profile phase. The local
    gap along the surface is ``z + h2(x) - h1(x)``.
    """

    radius: float
    separation: float
    phase: float
    temperature: float
    plate: GratingProfile
    imprint: GratingProfile

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.temperature <= 0.0:
            raise ValueError("temperature must be positive")
        if abs(self.plate.period - self.imprint.period) > \
                1e-9 * self.plate.period:
            raise ValueError("plate and imprint periods must match")
        if self.separation <= self.plate.amplitude + \
                self.imprint.amplitude:
            raise ValueError(
                f"separation {self.separation} must exceed the summed "
                f"amplitudes "
                f"{self.plate.amplitude + self.imprint.amplitude}")

    def with_phase(self, phi):
        return SphereGratingGeometry(
            radius=self.radius, separation=self.separation, phase=phi,
            temperature=self.temperature, plate=self.plate,
            imprint=self.imprint)

    def with_separation(self, z):
        return SphereGratingGeometry(
            radius=self.radius, separation=z, phase=self.phase,
            temperature=self.temperature, plate=self.plate,
            imprint=self.imprint)


@dataclass
class ForceCurve:
    """Scalar observable along one abscissa with run metadata.

    ``metadata`` holds the resolved numerics and convergence report;
    written as ``# key=value`` header lines by :meth:`to_csv`.
    """

    abscissa_name: str
    abscissa: np.ndarray
    force_n: np.ndarray
    metadata: dict = field(default_factory=dict)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for key in sorted(self.metadata):
                fh.write(f"# {key}={self.metadata[key]}\n")
            fh.write(f"{self.abscissa_name},force_N\n")
            for a, f in zip(self.abscissa, self.force_n):
                fh.write(f"{a:.17g},{f:.17g}\n")

    @classmethod
    def from_csv(cls, path):
        meta = {}
        rows = []
        name = "abscissa"
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line[1:].strip()
                    if "=" in body:
                        k, v = body.split("=", 1)
                        meta[k.strip()] = v.strip()
                    continue
                if line[0].isalpha():
                    name = line.split(",", 1)[0]
                    continue
                a, f = line.split(",")
                rows.append((float(a), float(f)))
        arr = np.array(rows) if rows else np.zeros((0, 2))
        return cls(abscissa_name=name, abscissa=arr[:, 0],
                   force_n=arr[:, 1], metadata=meta)


def _material_tag(material):
    osc = getattr(material, "oscillators", ())
    return (type(material).__name__, getattr(material, "omega_p", 0.0),
            tuple(osc))


class ReflectionSet:
    """Per-mirror cache of reflection stacks over the (kx, ky) grid.

    Keyed by Matsubara index; optionally mirrored to ``CASIMIR_CACHE_DIR``
    as one ``.npz`` per (mirror, index).
    """

    def __init__(self, profile, kx_nodes, ky_nodes, n_orders, config,
                 xi_of_l):
        self.profile = profile
        self.kx = kx_nodes
        self.ky = ky_nodes
        self.n_orders = n_orders
        self.config = config
        self.xi_of_l = xi_of_l
        self._mem = {}
        self._dir = os.environ.get("CASIMIR_CACHE_DIR", "")
        key_src = repr((_material_tag(profile.material), profile.period,
                        profile.amplitude, tuple(kx_nodes),
                        tuple(ky_nodes), n_orders, config.ode_rtol,
                        config.ode_atol, config.substep_efolds,
                        config.xi0_fraction))
        self._tag = hashlib.sha1(key_src.encode()).hexdigest()[:16]

    def _disk_path(self, l):
        return os.path.join(self._dir, f"refl_{self._tag}_l{l}.npz")

    def get(self, l):
        """Stacks ``(r, kappa)`` with shapes (nkx, nky, 2m, 2m) and
        (nkx, nky, m) for Matsubara index ``l``."""
        if l in self._mem:
            return self._mem[l]
        if self._dir:
            path = self._disk_path(l)
            if os.path.exists(path):
                with np.load(path) as dat:
                    out = (dat["r"], dat["kappa"])
                self._mem[l] = out
                return out
        out = self._compute(l)
        self._mem[l] = out
        if self._dir:
            np.savez(self._disk_path(l), r=out[0], kappa=out[1])
        return out

    def _compute(self, l):
        xi = self.xi_of_l(l)
        cfg = self.config
        eps = eps_imag(self.profile.material, xi)
        q0 = xi / HBAR_C
        m = 2 * self.n_orders + 1
        nx, ny = len(self.kx), len(self.ky)
        r = np.empty((nx, ny, 2 * m, 2 * m))
        kap = np.empty((nx, ny, m))
        for i, kx in enumerate(self.kx):
            for j, ky in enumerate(self.ky):
                rr, kk, status = _kernels._reflection_core(
                    self.profile.amplitude, self.profile.period, eps,
                    float(kx), float(ky), q0, self.n_orders, cfg.ode_rtol,
                    cfg.ode_atol, cfg.substep_efolds, _MAX_STEPS)
                if status != 0:
                    raise PropagationError(
                        f"reflection solve failed "
                        f"({_STATUS_MSG.get(status, status)}) at "
                        f"l={l}, kx={kx:.6g}, ky={ky:.6g}")
                r[i, j] = rr
                kap[i, j] = kk
        return r, kap


class ForceEngine:
    """Assembles energies and lateral forces for one geometry family.

    Grids (Bloch, transverse, Matsubara schedule) are frozen at
    construction from ``z_candidates`` so reflection stacks are shared by
    every separation, phase, and observable evaluated through the same
    engine.
    """

    def __init__(self, geometry, config=None, z_candidates=None):
        self.geometry = geometry
        self.config = config or NumericsConfig()
        zs = sorted(z_candidates or [geometry.separation])
        self.z_min = zs[0]
        a_sum = geometry.plate.amplitude + geometry.imprint.amplitude
        if self.z_min <= a_sum:
            raise ValueError("every separation must exceed A1 + A2")
        self.gap_min = self.z_min - a_sum
        cfg = self.config
        if cfg.n_orders_sequence:
            self.n_list = tuple(cfg.n_orders_sequence)
        else:
            self.n_list = (cfg.n_orders or max(
                default_orders(geometry.plate),
                default_orders(geometry.imprint)),)
        self.n_orders = self.n_list[-1]

        period = geometry.plate.period
        self.kx, self.wkx = gauss_nodes(cfg.kx_nodes, 0.0,
                                        math.pi / period)
        scale = cfg.ky_scale or 1.0 / (2.0 * self.gap_min)
        self.ky_scale = scale
        self.ky, self.wky = semi_infinite_nodes(cfg.ky_nodes, scale)
        self.xi1 = matsubara_xi(1, geometry.temperature)

        def xi_of_l(l):
            if l == 0:
                return cfg.xi0_fraction * self.xi1
            return matsubara_xi(l, geometry.temperature)

        self.xi_of_l = xi_of_l
        self.plate_sets = tuple(
            ReflectionSet(geometry.plate, self.kx, self.ky, n, cfg,
                          xi_of_l) for n in self.n_list)
        self.imprint_sets = tuple(
            ReflectionSet(geometry.imprint, self.kx, self.ky, n, cfg,
                          xi_of_l) for n in self.n_list)
        self.order_diffs = []
        self.mirror_masks = []
        for n in self.n_list:
            n_idx = np.arange(-n, n + 1)
            oi = np.concatenate([n_idx, n_idx])
            self.order_diffs.append(oi[:, None] - oi[None, :])
            # z-mirror map for the downward-facing imprint: the state
            # (Ex, Ey, hx, hy) picks up diag(1, 1, -1, -1) under
            # zeta -> -zeta, which conjugates the solver's upward-facing
            # reflection by diag(+1_E, -1_H); entrywise that flips the
            # E<->H mixing blocks.
            sgn = np.concatenate([np.ones(len(n_idx)),
                                  -np.ones(len(n_idx))])
            self.mirror_masks.append(np.outer(sgn, sgn))
        self.order_index = np.concatenate(
            [np.arange(-self.n_orders, self.n_orders + 1)] * 2)
        self.a_sum = a_sum
        self.report = {
            "n_orders": self.n_orders,
            "n_orders_sequence": tuple(self.n_list),
            "kx_nodes": cfg.kx_nodes,
            "ky_nodes": cfg.ky_nodes,
            "ky_scale_inv_nm": scale,
            "ode_rtol": cfg.ode_rtol,
            "ode_atol": cfg.ode_atol,
            "matsubara_sampling": cfg.matsubara_sampling,
            "matsubara_rel_tol": cfg.matsubara_rel_tol,
            "xi0_fraction": cfg.xi0_fraction,
        }

    # -- per-node assembly -------------------------------------------------

    def _delta(self, phi):
        g = self.geometry
        return g.imprint.phase + phi + math.pi - g.plate.phase

    def _node_reduce(self, l, zp, wz, phis, want_force):
        """Quadrature over (kx, ky, z') at one Matsubara index.

        Returns ``(energy[phi], force[phi])`` integrals of Re ln det and
        Re tr[(1-M)^-1 dM/dphi]; the force slot is None unless requested.
        With a truncation sequence configured, both integrands are
        Shanks-extrapolated per (z', phi) node before quadrature.
        """
        stacks = []
        for t in range(len(self.n_list)):
            r1s, kaps = self.plate_sets[t].get(l)
            r2s, _ = self.imprint_sets[t].get(l)
            stacks.append((r1s, r2s * self.mirror_masks[t][None, None],
                           kaps))
        deltas = np.array([self._delta(p) for p in phis])
        # phase similarity and its order-difference derivative factor
        expds = [np.exp(1j * deltas[:, None, None] * od)
                 for od in self.order_diffs]
        eyes = [np.eye(2 * (2 * n + 1)) for n in self.n_list]
        n_seq = len(self.n_list)
        e_out = np.zeros(len(phis))
        f_out = np.zeros(len(phis)) if want_force else None
        gvec = zp - self.a_sum
        for i in range(len(self.kx)):
            wx = self.wkx[i]
            for j in range(len(self.ky)):
                w = wx * self.wky[j]
                # specular decay is truncation-independent, so one live
                # mask serves every member of the sequence
                kmin = stacks[0][2][i, j].min()
                live = gvec * kmin < 345.0
                if not live.any():
                    continue
                gl = gvec[live]
                wzl = (wz * w)[live]
                e_seq = np.empty((n_seq, len(gl), len(phis)))
                f_seq = np.empty_like(e_seq) if want_force else None
                for t, (r1s, r2s, kaps) in enumerate(stacks):
                    kap2 = np.concatenate([kaps[i, j], kaps[i, j]])
                    dm = np.exp(-np.minimum(gl[:, None] * kap2[None, :],
                                            700.0))
                    r1d = r1s[i, j][None, :, :] * dm[:, None, :]
                    c = expds[t] * r2s[i, j][None, :, :]
                    mm = r1d[:, None, :, :] @ c[None, :, :, :]
                    mm *= dm[:, None, None, :]
                    imm = eyes[t][None, None] - mm
                    sign, logabs = np.linalg.slogdet(imm)
                    e_seq[t] = logabs
                    if want_force:
                        cd = (1j * self.order_diffs[t]) * c
                        dmm = r1d[:, None, :, :] @ cd[None, :, :, :]
                        dmm *= dm[:, None, None, :]
                        x = np.linalg.solve(imm, dmm)
                        f_seq[t] = np.real(np.trace(x, axis1=-2,
                                                    axis2=-1))
                if n_seq == 3:
                    e_val = shanks_limit(e_seq[0], e_seq[1], e_seq[2])
                else:
                    e_val = e_seq[-1]
                e_out += wzl @ e_val
                if want_force:
                    if n_seq == 3:
                        f_val = shanks_limit(f_seq[0], f_seq[1], f_seq[2])
                    else:
                        f_val = f_seq[-1]
                    f_out += wzl @ f_val
        return e_out, f_out

    # -- Matsubara summation ----------------------------------------------

    def _sum_terms(self, worker):
        """Weighted Matsubara sum of phi-vectors produced by ``worker``.

        Full mode walks every index with the two-in-a-row stop rule;
        sparse mode evaluates a dense head plus geometric tail and sums a
        PCHIP interpolant over the integer indices in between.
        """
        cfg = self.config
        tol = cfg.matsubara_rel_tol
        total = 0.5 * worker(0)
        scale_hist = float(np.max(np.abs(total)))
        if cfg.matsubara_sampling == "full":
            below = 0
            l = 1
            while True:
                term = worker(l)
                total = total + term
                mag = float(np.max(np.abs(term)))
                ref = max(float(np.max(np.abs(total))), scale_hist, 1e-300)
                below = below + 1 if mag <= tol * ref else 0
                if below >= 2:
                    self.report["matsubara_terms_total"] = l + 1
                    self.report["matsubara_terms_evaluated"] = l + 1
                    return total
                l += 1
                if l > cfg.l_max:
                    raise ConvergenceError("matsubara_sum", mag, tol,
                                           detail=f"l_max={cfg.l_max}")
        # sparse: exact head, geometric tail samples, monotone interpolant
        from scipy.interpolate import PchipInterpolator

        head = cfg.sparse_head
        samples = {}
        l = 1
        while l <= head:
            term = worker(l)
            samples[l] = term
            total = total + term
            l += 1
        tail_ls = []
        tail_vals = []
        lcur = head
        ref0 = max(float(np.max(np.abs(total))), 1e-300)
        while True:
            lnext = int(math.ceil(lcur * cfg.sparse_ratio))
            if lnext <= lcur:
                lnext = lcur + 1
            if lnext > cfg.l_max:
                raise ConvergenceError(
                    "matsubara_sparse", float("nan"), tol,
                    detail=f"l_max={cfg.l_max} before tail decayed")
            term = worker(lnext)
            tail_ls.append(lnext)
            tail_vals.append(term)
            lcur = lnext
            mag = float(np.max(np.abs(term)))
            if len(tail_ls) >= 2 and mag <= tol * ref0:
                break
        nodes = [head] + tail_ls
        vals = [samples[head]] + tail_vals
        interp = PchipInterpolator(np.array(nodes, dtype=float),
                                   np.vstack(vals), axis=0)
        l_int = np.arange(head + 1, tail_ls[-1] + 1, dtype=float)
        total = total + interp(l_int).sum(axis=0)
        self.report["matsubara_terms_total"] = tail_ls[-1] + 1
        self.report["matsubara_terms_evaluated"] = 1 + head + len(tail_ls)
        return total

    # -- observables -------------------------------------------------------

    def energy_density(self, zprime, phis):
        """Area energy density (J/m^2) at mean-plane separation zprime
        for each phase in ``phis``."""
        phis = np.atleast_1d(np.asarray(phis, dtype=float))
        zp = np.array([float(zprime)])
        wz = np.array([1.0])

        def worker(l):
            e, _ = self._node_reduce(l, zp, wz, phis, want_force=False)
            return e

        vals = self._sum_terms(worker)
        pref = KB * self.geometry.temperature / math.pi ** 2
        return pref * vals * EV_PER_NM2_TO_J_M2

    def lateral_force_vector(self, z, phis):
        """Lateral force (N) at separation ``z`` for each phase."""
        phis = np.atleast_1d(np.asarray(phis, dtype=float))
        zp, wz = zprime_nodes(float(z), self.config)

        def worker(l):
            _, f = self._node_reduce(l, zp, wz, phis, want_force=True)
            return f

        t0 = time.time()
        vals = self._sum_terms(worker)
        self.report["last_eval_seconds"] = round(time.time() - t0, 3)
        g = self.geometry
        pref = 4.0 * KB * g.temperature * g.radius / g.plate.period
        return pref * vals * EV_PER_NM_TO_N

    def lateral_force(self, z, phi):
        return float(self.lateral_force_vector(z, [phi])[0])

    def odd_phase_curve(self, z, n_harmonics=None):
        """Engine evaluations on the odd grid ``phi_j = j pi / n``.

        Returns ``(phis, forces)`` with ``j = 1 .. n-1``; together with
        the construction zeros at 0 and pi and oddness this determines
        the sine series exactly up to harmonic ``n - 1``.
        """
        n = n_harmonics or 16
        phis = np.arange(1, n) * math.pi / n
        return phis, self.lateral_force_vector(z, phis)

    def max_lateral_force(self, z):
        """Location and value of the peak ``|F_lat|`` over one period.

        Coarse 32-point grid (odd-symmetry completion of true engine
        values) followed by golden-section refinement to 1e-3 rad.
        """
        n = 16
        phis, forces = self.odd_phase_curve(z, n)
        # true values on the full 32-point grid via exact oddness
        grid = np.concatenate([[0.0], phis, [math.pi],
                               2.0 * math.pi - phis[::-1]])
        vals = np.concatenate([[0.0], forces, [0.0], -forces[::-1]])
        k0 = int(np.argmax(np.abs(vals)))
        lo = grid[max(k0 - 1, 0)]
        hi = grid[min(k0 + 1, len(grid) - 1)]

        invphi = (math.sqrt(5.0) - 1.0) / 2.0

        def fneg(p):
            return -abs(self.lateral_force(z, p))

        a, b = lo, hi
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = fneg(c), fneg(d)
        while (b - a) > 1e-3:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = fneg(c)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = fneg(d)
        phi_star = 0.5 * (a + b)
        return phi_star, self.lateral_force(z, phi_star)


# -- reconstruction helpers ------------------------------------------------

def sine_series(phis, forces, n):
    """Sine coefficients ``b_k`` from engine values on the odd grid.

    ``phis`` must be ``j pi / n`` for ``j = 1..n-1``; returns
    ``b_1..b_{n-1}`` with ``F(phi) = sum b_k sin(k phi)``.
    """
    j = np.arange(1, n)
    mat = np.sin(np.outer(j, j) * math.pi / n)
    return (2.0 / n) * (mat @ forces)


def eval_sine_series(bk, phi):
    k = np.arange(1, len(bk) + 1)
    return np.sin(np.outer(np.atleast_1d(phi), k)) @ bk


# -- public one-shot wrappers ---------------------------------------------

def grating_free_energy_density(geometry, zprime, phi, config=None):
    """Casimir free energy per area (J/m^2) of the corrugated pair at
    mean-plane separation ``zprime`` and phase ``phi``."""
    eng = ForceEngine(geometry, config, z_candidates=[zprime])
    return float(eng.energy_density(zprime, [phi])[0])


def lateral_force_exact(geometry, config=None):
    """Lateral Casimir force (N) at the geometry's phase and separation."""
    eng = ForceEngine(geometry, config)
    return eng.lateral_force(geometry.separation, geometry.phase)


def max_lateral_force(geometry, config=None):
    """Peak ``|F_lat|`` over one phase period: ``(phi_star, f_star)``."""
    eng = ForceEngine(geometry, config)
    return eng.max_lateral_force(geometry.separation)


# -- proximity-force (PFA) engine -----------------------------------------

def corrugation_modulation(a1, a2, phi):
    """Amplitude of the local-gap modulation,
    ``sqrt(A1^2 + A2^2 - 2 A1 A2 cos phi)``."""
    return math.sqrt(max(a1 * a1 + a2 * a2 - 2.0 * a1 * a2
                         * math.cos(phi), 0.0))


class PfaEngine:
    """Proximity-force treatment: both corrugations and the sphere
    curvature enter through gap averages of the flat-plate energy."""

    def __init__(self, geometry, config=None, z_max=None):
        self.geometry = geometry
        self.config = config or NumericsConfig()
        g = geometry
        m_max = g.plate.amplitude + g.imprint.amplitude
        z_hi = (z_max or g.separation) + m_max + 1.0
        z_lo = g.separation - m_max
        if z_lo <= 0.5:
            raise ValueError("separation too small for the PFA gap range")
        self._interp = PlateEnergyInterpolator(
            g.plate.material, g.temperature, 0.9 * z_lo, z_hi,
            self.config)

    def lateral_force(self, z, phi):
        """PFA lateral force (N) at separation ``z`` and phase ``phi``.

        The separation integral of the proximity energy is exchanged with
        the phase derivative and evaluated in closed form, leaving a
        single periodic average over the corrugation coordinate.
        """
        g = self.geometry
        a1, a2 = g.plate.amplitude, g.imprint.amplitude
        if a1 == 0.0 or a2 == 0.0:
            return 0.0
        mod = corrugation_modulation(a1, a2, phi)
        if mod == 0.0:
            return 0.0
        n = 64
        prev = None
        while n <= 4096:
            u = (np.arange(n) + 0.5) * (2.0 * math.pi / n)
            su = np.sin(u)
            avg = float(np.mean(self._interp(z + mod * su) * su))
            if prev is not None and abs(avg - prev) <= 1e-9 * max(
                    abs(avg), 1e-300):
                break
            prev = avg
            n *= 2
        pref = (4.0 * math.pi ** 2 * g.radius * a1 * a2
                * math.sin(phi)) / (g.plate.period * mod)
        return pref * avg * EV_PER_NM_TO_N

    def energy_density(self, zprime, phi):
        """Corrugation-averaged area energy density (J/m^2)."""
        g = self.geometry
        mod = corrugation_modulation(g.plate.amplitude,
                                     g.imprint.amplitude, phi)
        n = 256
        u = (np.arange(n) + 0.5) * (2.0 * math.pi / n)
        vals = self._interp(zprime + mod * np.sin(u))
        return float(np.mean(vals)) * EV_PER_NM2_TO_J_M2

    def max_lateral_force(self, z):
        from scipy.optimize import minimize_scalar

        res = minimize_scalar(lambda p: -abs(self.lateral_force(z, p)),
                              bounds=(1e-6, math.pi - 1e-6),
                              method="bounded",
                              options={"xatol": 1e-6})
        return float(res.x), self.lateral_force(z, float(res.x))


def pfa_lateral_force(geometry, config=None):
    return PfaEngine(geometry, config).lateral_force(
        geometry.separation, geometry.phase)


def pfa_sphere_normal_force(separation, material, temperature, radius,
                            config=None):
    """PFA normal force on the sphere above a flat plate:
    ``2 pi R * E_pp(z)`` (attractive, negative), in newtons."""
    e_area = free_energy_ev_nm2(material, separation, temperature, config)
    return 2.0 * math.pi * radius * e_area * EV_PER_NM_TO_N
