r"""Calibration chain for lateral-force sweeps on synthetic signals.

The measured deflection signal at each corrugation phase mixes the
Casimir contribution with the electrostatic one.  This module carries the
analysis steps used to calibrate such sweeps: sine-harmonic
decomposition, subtraction of an interpolated Casimir waveform, nonlinear
fits for the bending calibration ``k_ben`` and contact offset ``z0``, the
residual-potential vertex fit, the asymmetry metric of a force-vs-phase
curve, and quadrature error combination.  Synthetic signal generation
with seeded noise and an optional slow drift ramp replaces raw
instrument files, which are out of scope.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import t as student_t

from .errors import ConvergenceError

__all__ = [
    "DeflectionSignal",
    "HarmonicFit",
    "CalibrationResult",
    "harmonic_fit",
    "subtract_casimir",
    "fit_kben_z0",
    "fit_residual_potential",
    "asymmetry_shift",
    "combine_errors",
    "synthesize_signal",
    "DRIFT_RATE_PRESET",
]

# slow separation drift of the setup this pipeline is modeled after, nm/min
DRIFT_RATE_PRESET = 0.14


@dataclass(frozen=True)
class DeflectionSignal:
    """A phase sweep of the deflection signal at one separation/voltage.

    Parameters
    ----------
    phase : ndarray
        Sample phases in rad, covering at least one full period.
    signal : ndarray
        Deflection readings, arbitrary signal units.
    separation : float
        Piezo displacement from contact in nm (absolute separation is
        ``z0 + separation`` once ``z0`` is calibrated).
    voltage : float
        Applied voltage in volts.
    seed : int or None
        Noise seed when synthetic, None for derived signals.
    metadata : dict
    """

    phase: np.ndarray
    signal: np.ndarray
    separation: float
    voltage: float
    seed: int = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        phase = np.asarray(self.phase, dtype=float)
        signal = np.asarray(self.signal, dtype=float)
        object.__setattr__(self, "phase", phase)
        object.__setattr__(self, "signal", signal)
        if phase.shape != signal.shape or phase.ndim != 1:
            raise ValueError("phase and signal must be matching 1-d arrays")
        span = phase.max() - phase.min()
        # endpoint-free periodic grids stop one step short of the period
        step = span / (len(phase) - 1) if len(phase) > 1 else 0.0
        if span + step < 2.0 * math.pi * (1.0 - 1e-9):
            raise ValueError("phase coverage must span at least one period")
        per_period = len(phase) / ((span + step) / (2.0 * math.pi))
        if per_period < 64:
            raise ValueError(
                f"need >= 64 samples per period, got {per_period:.0f}")

    def to_csv(self, path):
        """Write ``phi_rad,signal`` rows with a ``#`` metadata header."""
        with open(path, "w") as fh:
            fh.write(f"# separation={self.separation!r}\n")
            fh.write(f"# voltage={self.voltage!r}\n")
            if self.seed is not None:
                fh.write(f"# seed={self.seed!r}\n")
            for key, val in sorted(self.metadata.items()):
                fh.write(f"# {key}={val!r}\n")
            fh.write("phi_rad,signal\n")
            for p, s in zip(self.phase, self.signal):
                fh.write(f"{p:.17g},{s:.17g}\n")

    @classmethod
    def from_csv(cls, path):
        meta = {}
        phases, signals = [], []
        with open(path) as fh:
            for raw in fh:
                line = raw.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, val = line[1:].strip().partition("=")
                    meta[key.strip()] = val.strip()
                    continue
                if line.startswith("phi_rad"):
                    continue
                p, _, s = line.partition(",")
                phases.append(float(p))
                signals.append(float(s))
        seed = meta.pop("seed", None)
        sep = float(meta.pop("separation", "nan"))
        volt = float(meta.pop("voltage", "nan"))
        return cls(np.array(phases), np.array(signals), separation=sep,
                   voltage=volt, seed=None if seed is None else int(seed),
                   metadata=meta)


@dataclass(frozen=True)
class HarmonicFit:
    """Sine-series decomposition ``offset + sum_k A_k sin(k phi)``."""

    amplitudes: np.ndarray
    offset: float
    rms_residual: float

    def waveform(self, phase):
        phase = np.asarray(phase, dtype=float)
        out = np.full_like(phase, self.offset)
        for k, a in enumerate(self.amplitudes, start=1):
            out += a * np.sin(k * phase)
        return out


@dataclass(frozen=True)
class CalibrationResult:
    """Fitted calibration constants with 95 % confidence half-widths."""

    k_ben: float
    z0: float
    v0: float
    k_ben_err: float
    z0_err: float
    v0_err: float
    residual_norm: float
    condition: float


def harmonic_fit(sig, k_max):
    """Least-squares sine-harmonic decomposition of a sweep.

    The basis is ``{1, sin(phi), ..., sin(k_max phi)}``; no cosine terms,
    matching the odd symmetry of the lateral force, with the constant
    absorbing detector bias.

    Parameters
    ----------
    sig : DeflectionSignal
    k_max : int
        Highest harmonic, >= 1; needs more than ``2 k_max + 1`` samples.

    Returns
    -------
    HarmonicFit
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    n = len(sig.phase)
    if n <= 2 * k_max + 1:
        raise ValueError("too few samples for the requested harmonics")
    cols = [np.ones(n)]
    for k in range(1, k_max + 1):
        cols.append(np.sin(k * sig.phase))
    basis = np.column_stack(cols)
    coef, _, rank, _ = np.linalg.lstsq(basis, sig.signal, rcond=None)
    if rank < k_max + 1:
        raise ValueError("degenerate phase sampling: harmonic basis is "
                         "rank deficient")
    resid = sig.signal - basis @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return HarmonicFit(amplitudes=coef[1:], offset=float(coef[0]),
                       rms_residual=rms)


def subtract_casimir(total, harmonics):
    """Remove an interpolated Casimir waveform from a total sweep.

    Parameters
    ----------
    total : DeflectionSignal
    harmonics : sequence of (separation, HarmonicFit)
        Harmonic fits of the Casimir-only signal at separations that
        bracket ``total.separation``; each ``A_k`` (and the offset) is
        interpolated linearly in separation.

    Returns
    -------
    DeflectionSignal
        The sweep with the reconstructed Casimir waveform subtracted.
    """
    pairs = sorted(harmonics, key=lambda it: it[0])
    seps = np.array([s for s, _ in pairs])
    if len(pairs) < 2:
        raise ValueError("need harmonic fits at >= 2 separations")
    if not (seps[0] <= total.separation <= seps[-1]):
        raise ValueError(
            f"separation {total.separation} nm outside the bracketing "
            f"range [{seps[0]}, {seps[-1]}] nm: refusing to extrapolate")
    k_max = len(pairs[0][1].amplitudes)
    amps = np.array([fit.amplitudes for _, fit in pairs])
    offs = np.array([fit.offset for _, fit in pairs])
    a_at = np.array([np.interp(total.separation, seps, amps[:, k])
                     for k in range(k_max)])
    interp = HarmonicFit(amplitudes=a_at,
                         offset=float(np.interp(total.separation, seps,
                                                offs)),
                         rms_residual=0.0)
    cleaned = total.signal - interp.waveform(total.phase)
    return replace(total, signal=cleaned, seed=None,
                   metadata=dict(total.metadata, casimir_subtracted="yes"))


def fit_kben_z0(electro_signals, model, start=(1.0, 100.0)):
    """Calibrate the bending constant and contact offset.

    Minimizes ``sum (k_ben S_i - F(z0 + d_i, phi_i, V_i))^2`` over
    ``(k_ben, z0)`` where ``d_i`` is the piezo displacement of each
    sweep and ``F`` the model lateral force in nN.

    Parameters
    ----------
    electro_signals : sequence of DeflectionSignal
        Electrostatic-only sweeps at >= 2 distinct separations.
    model : callable
        ``model(separation_nm, phase, voltage) -> force_nN``; must accept
        an ndarray of phases.
    start : tuple
        Initial ``(k_ben, z0)``.

    Returns
    -------
    CalibrationResult
        ``v0`` fields are NaN here; this fit takes V0 as known inside
        ``model``.
    """
    sigs = list(electro_signals)
    if len({round(s.separation, 9) for s in sigs}) < 2:
        raise ValueError("need sweeps at >= 2 distinct separations")

    def residual(params):
        k_ben, z0 = params
        out = []
        for s in sigs:
            f = model(z0 + s.separation, s.phase, s.voltage)
            out.append(k_ben * s.signal - f)
        return np.concatenate(out)

    res = least_squares(residual, x0=np.asarray(start, dtype=float),
                        method="lm", xtol=1e-14, ftol=1e-14)
    if not res.success:
        raise ConvergenceError("kben_z0_fit", float(np.sum(res.fun ** 2)),
                               0.0, detail=res.message)
    jac = res.jac
    sv = np.linalg.svd(jac, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if cond > 1e8:
        raise ValueError(
            f"ill-conditioned calibration fit (condition {cond:.3g}): "
            f"vary separation and voltage across sweeps")
    n_pts = len(res.fun)
    dof = n_pts - 2
    s2 = float(np.sum(res.fun ** 2)) / dof
    cov = np.linalg.inv(jac.T @ jac) * s2
    half = student_t.ppf(0.975, dof) * np.sqrt(np.diag(cov))
    return CalibrationResult(
        k_ben=float(res.x[0]), z0=float(res.x[1]), v0=math.nan,
        k_ben_err=float(half[0]), z0_err=float(half[1]), v0_err=math.nan,
        residual_norm=float(np.linalg.norm(res.fun)), condition=cond)


def fit_residual_potential(signals, curvature_sign=0):
    """Residual potential from the parabolic voltage dependence.

    Each sweep is reduced to its first-harmonic amplitude, which scales
    as ``(V - V0)^2``; a quadratic fit in V then puts V0 at the vertex.

    Parameters
    ----------
    signals : sequence of DeflectionSignal
        Sweeps at >= 3 distinct voltages, same separation and geometry.
    curvature_sign : int
        If +1 or -1, require the fitted curvature to carry that sign.

    Returns
    -------
    (v0, half_width) : tuple of float
        Vertex abscissa in volts and its 95 % confidence half-width.
    """
    sigs = list(signals)
    volts = np.array([s.voltage for s in sigs])
    if len(np.unique(np.round(volts, 12))) < 3:
        raise ValueError("need >= 3 distinct voltages")
    amp1 = np.array([harmonic_fit(s, 1).amplitudes[0] for s in sigs])
    basis = np.column_stack([volts ** 2, volts, np.ones_like(volts)])
    coef, _, _, _ = np.linalg.lstsq(basis, amp1, rcond=None)
    a, b, _ = coef
    if a == 0.0:
        raise ValueError("no curvature in the voltage dependence")
    if curvature_sign and a * curvature_sign < 0:
        raise ValueError("fitted curvature sign inconsistent with model")
    v0 = -b / (2.0 * a)
    resid = amp1 - basis @ coef
    dof = len(sigs) - 3
    if dof > 0:
        s2 = float(np.sum(resid ** 2)) / dof
        cov = np.linalg.inv(basis.T @ basis) * s2
        # delta method on v0 = -b/2a
        grad = np.array([b / (2.0 * a * a), -1.0 / (2.0 * a), 0.0])
        var = float(grad @ cov @ grad)
        half = student_t.ppf(0.975, dof) * math.sqrt(max(var, 0.0))
    else:
        half = 0.0
    return float(v0), float(half)


def _refine_extremum(phi, f, i):
    """Parabolic refinement of an extremum at interior index ``i``."""
    x0, x1, x2 = phi[i - 1], phi[i], phi[i + 1]
    y0, y1, y2 = f[i - 1], f[i], f[i + 1]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0)
         + x0 * x0 * (y1 - y2)) / denom
    if a == 0.0:
        return x1
    return -b / (2.0 * a)


def asymmetry_shift(curve):
    """Mean shift of force maxima from the midpoint of adjacent minima.

    Parameters
    ----------
    curve : ForceCurve or similar
        Needs ``abscissa`` (phase in rad over >= 2 periods, >= 128
        samples per period) and ``force_n``.

    Returns
    -------
    (shift, spread) : tuple of float
        Shift in units of the corrugation period (phase/2pi) averaged
        over periods, and the sample standard deviation across periods
        (0 for a single usable period).
    """
    phi = np.asarray(curve.abscissa, dtype=float)
    f = np.asarray(curve.force_n, dtype=float)
    span = phi.max() - phi.min()
    if len(phi) / (span / (2.0 * math.pi)) < 128:
        raise ValueError("need >= 128 samples per period")
    d = np.diff(f)
    maxima, minima = [], []
    for i in range(1, len(f) - 1):
        if d[i - 1] > 0.0 and d[i] <= 0.0:
            maxima.append(_refine_extremum(phi, f, i))
        elif d[i - 1] < 0.0 and d[i] >= 0.0:
            minima.append(_refine_extremum(phi, f, i))
    shifts = []
    for pm in maxima:
        left = [m for m in minima if m < pm]
        right = [m for m in minima if m > pm]
        if left and right:
            shifts.append((pm - 0.5 * (left[-1] + right[0]))
                          / (2.0 * math.pi))
    if not shifts:
        raise ValueError("curve does not resolve a full period of extrema")
    shifts = np.array(shifts)
    spread = float(np.std(shifts, ddof=1)) if len(shifts) > 1 else 0.0
    return float(np.mean(shifts)), spread


def combine_errors(random, systematic, confidence=0.95):
    """Total error as the quadrature sum of the two components.

    Both inputs must already be half-widths at the same confidence
    level (0.95 by convention here); the combination is
    ``sqrt(random^2 + systematic^2)``.
    """
    if random < 0.0 or systematic < 0.0:
        raise ValueError("error components must be nonnegative")
    if not (0.0 < confidence < 1.0):
        raise ValueError("confidence must be in (0, 1)")
    return math.hypot(random, systematic)


def synthesize_signal(model, separation, voltage, seed, n_samples=8192,
                      periods=2.0, sigma=0.0, drift=None):
    """Deterministic synthetic sweep from a truth model plus noise.

    Parameters
    ----------
    model : callable
        ``model(phase_array) -> signal`` truth waveform.
    separation : float
        Piezo displacement tag for the sweep, nm.
    voltage : float
    seed : int
        Seed for ``numpy.random.default_rng``; same seed, same output.
    n_samples : int
    periods : float
        Phase coverage in corrugation periods.
    sigma : float
        Additive white Gaussian noise level in signal units.
    drift : tuple, optional
        ``(rate_nm_per_min, minutes, signal_per_nm)`` linear ramp: the
        separation drifts by ``rate * minutes`` over the sweep and
        couples through the given signal sensitivity.
        ``DRIFT_RATE_PRESET`` carries the modeled setup's 0.14 nm/min.

    Returns
    -------
    DeflectionSignal
    """
    phase = np.linspace(0.0, 2.0 * math.pi * periods, n_samples,
                        endpoint=False)
    clean = np.asarray(model(phase), dtype=float)
    rng = np.random.default_rng(seed)
    out = clean.copy()
    if sigma > 0.0:
        out = out + rng.normal(0.0, sigma, n_samples)
    meta = {}
    if drift is not None:
        rate, minutes, per_nm = drift
        ramp = rate * minutes * np.linspace(0.0, 1.0, n_samples)
        out = out + ramp * per_nm
        meta["drift_nm"] = rate * minutes
    return DeflectionSignal(phase=phase, signal=out, separation=separation,
                            voltage=voltage, seed=seed, metadata=meta)
