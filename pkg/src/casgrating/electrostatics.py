r"""Electrostatic sphere-grating forces with matched corrugations.

Normal force between a conducting sphere and a corrugated plate held at a
potential difference, with a matching sinusoidal imprint on the sphere.
The normal force is a closed-form bracket in the reduced corrugation
amplitude ``beta = b/z`` with ``b^2 = A1^2 + A2^2 - 2 A1 A2 cos(phi)``,
multiplied by ``-2 pi eps0 (V - V0)^2``; the polynomial coefficients
``c0..c6`` describing finite-size corrections are external inputs and are
never defaulted silently.

The lateral force follows from the normal one by integrating over the
separation and differentiating in the corrugation phase.  Each bracket
term has an elementary antiderivative; the divergent boundary at infinite
separation is dropped term by term (only differences of the potential at
two separations, and phase derivatives, are physically used).  All lengths
are in nm, voltages in volts, forces in N; the bracket is dimensionless so
no unit conversion of lengths is needed.
"""

import math
from dataclasses import dataclass

from .constants import EPS0_SI
from .errors import ConfigError

__all__ = [
    "ElectrostaticConfig",
    "beta",
    "normal_electrostatic_force",
    "electrostatic_energy",
    "lateral_electrostatic_force",
    "load_coefficient_file",
]


def beta(z, phi, a1, a2):
    """Reduced corrugation amplitude ``sqrt(A1^2+A2^2-2A1A2 cos phi)/z``.

    Parameters
    ----------
    z : float
        Separation in nm, positive.
    phi : float
        Corrugation phase shift in rad.
    a1, a2 : float
        Corrugation amplitudes in nm.

    Returns
    -------
    float
        Value in ``[|A1-A2|/z, (A1+A2)/z]``.
    """
    if z <= 0.0:
        raise ValueError("separation must be positive")
    s = a1 * a1 + a2 * a2 - 2.0 * a1 * a2 * math.cos(phi)
    # roundoff can push s a hair below zero at phi=0, a1=a2
    return math.sqrt(max(s, 0.0)) / z


@dataclass(frozen=True)
class ElectrostaticConfig:
    """Inputs of the electrostatic sphere-grating model.

    Parameters
    ----------
    radius : float
        Sphere radius in nm.
    separation : float
        Crest-to-crest separation z in nm.
    phase : float
        Corrugation phase shift phi in rad.
    a1, a2 : float
        Plate and imprint corrugation amplitudes in nm.
    period : float
        Corrugation period in nm.
    voltage : float
        Applied voltage V in volts.
    residual_potential : float
        Residual potential difference V0 in volts.
    coeffs : tuple of float
        The seven dimensionless polynomial coefficients ``c0..c6``.
        Mandatory; use :func:`load_coefficient_file` for the shipped set.
    """

    radius: float
    separation: float
    phase: float
    a1: float
    a2: float
    period: float
    voltage: float
    residual_potential: float
    coeffs: tuple

    def __post_init__(self):
        if self.separation <= 0.0:
            raise ValueError("separation must be positive")
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        if self.period <= 0.0:
            raise ValueError("period must be positive")
        if len(self.coeffs) != 7:
            raise ValueError("coeffs must provide exactly c0..c6")
        if self.beta_max() >= 1.0:
            raise ValueError(
                f"beta = {self.beta_max():.4g} >= 1: corrugations touch the "
                f"model's validity boundary at this separation")

    def beta_max(self):
        """beta at the evaluation separation (its maximum over z' >= z)."""
        return beta(self.separation, self.phase, self.a1, self.a2)


def _b2(cfg, phi):
    return (cfg.a1 * cfg.a1 + cfg.a2 * cfg.a2
            - 2.0 * cfg.a1 * cfg.a2 * math.cos(phi))


def _prefactor(cfg):
    dv = cfg.voltage - cfg.residual_potential
    return -2.0 * math.pi * EPS0_SI * dv * dv


def normal_electrostatic_force(cfg):
    """Normal electrostatic force on the sphere, in N (attractive < 0).

    Evaluates the closed-form bracket in ``beta`` term by term; the
    leading term ``(R/2z)(1-beta^2)^(-1/2)`` is the proximity-force result
    for the corrugated pair, the ``c_i`` terms are finite-size
    corrections in powers of ``z/R``.
    """
    z = cfg.separation
    r = cfg.radius
    be = cfg.beta_max()
    b2 = be * be
    c0, c1, c2, c3, c4, c5, c6 = cfg.coeffs
    u = z / r
    bracket = (0.5 / u / math.sqrt(1.0 - b2)
               + c0
               + c1 * u
               + c2 * u * u * (2.0 + b2) / 2.0
               + c3 * u ** 3 * (2.0 + 3.0 * b2) / 2.0
               + c4 * u ** 4 * (8.0 + 24.0 * b2 + 3.0 * b2 * b2) / 8.0
               + c5 * u ** 5 * (8.0 + 40.0 * b2 + 15.0 * b2 * b2) / 8.0
               + c6 * u ** 6 * (16.0 + 120.0 * b2 + 90.0 * b2 * b2
                                + 5.0 * b2 ** 3) / 16.0)
    return _prefactor(cfg) * bracket


def electrostatic_energy(cfg, phi=None):
    """Term-wise antiderivative of the normal force, in N nm.

    The indefinite antiderivative of each bracket term with the boundary
    at infinite separation dropped; only differences between separations
    and derivatives in phase are meaningful.  ``phi`` overrides the
    config phase (used by the analytic phase derivative below).
    """
    z = cfg.separation
    r = cfg.radius
    if phi is None:
        phi = cfg.phase
    b2 = _b2(cfg, phi)
    if b2 >= z * z:
        raise ValueError("beta >= 1 on the integration path")
    w = math.sqrt(z * z - b2)
    c0, c1, c2, c3, c4, c5, c6 = cfg.coeffs
    terms = (0.5 * r * math.log(z + w)
             + c0 * z
             + c1 * z * z / (2.0 * r)
             + c2 * (z ** 3 / 3.0 + b2 * z / 2.0) / r ** 2
             + c3 * (z ** 4 / 4.0 + 0.75 * b2 * z * z) / r ** 3
             + c4 * (z ** 5 / 5.0 + b2 * z ** 3
                     + 0.375 * b2 * b2 * z) / r ** 4
             + c5 * (z ** 6 / 6.0 + 1.25 * b2 * z ** 4
                     + 0.9375 * b2 * b2 * z * z) / r ** 5
             + c6 * (z ** 7 / 7.0 + 1.5 * b2 * z ** 5
                     + 1.875 * b2 * b2 * z ** 3
                     + 0.3125 * b2 ** 3 * z) / r ** 6)
    return _prefactor(cfg) * terms


def lateral_electrostatic_force(cfg):
    """Lateral electrostatic force, in N.

    ``-(2 pi / period)`` times the analytic phase derivative of
    :func:`electrostatic_energy`, carried through ``b^2(phi)``.  Odd in
    phase, zero whenever ``A1 A2 sin(phi) = 0``.
    """
    z = cfg.separation
    r = cfg.radius
    b2 = _b2(cfg, cfg.phase)
    if b2 >= z * z:
        raise ValueError("beta >= 1 on the integration path")
    w = math.sqrt(z * z - b2)
    c0, c1, c2, c3, c4, c5, c6 = cfg.coeffs
    # d(terms)/d(b^2)
    db2 = (-0.25 * r / (w * (z + w))
           + c2 * (z / 2.0) / r ** 2
           + c3 * 0.75 * z * z / r ** 3
           + c4 * (z ** 3 + 0.75 * b2 * z) / r ** 4
           + c5 * (1.25 * z ** 4 + 1.875 * b2 * z * z) / r ** 5
           + c6 * (1.5 * z ** 5 + 3.75 * b2 * z ** 3
                   + 0.9375 * b2 * b2 * z) / r ** 6)
    db2_dphi = 2.0 * cfg.a1 * cfg.a2 * math.sin(cfg.phase)
    denergy = _prefactor(cfg) * db2 * db2_dphi
    return -(2.0 * math.pi / cfg.period) * denergy


def load_coefficient_file(path):
    """Read the seven ``c0..c6`` coefficients from a text file.

    One or more whitespace-separated values per line, ``#`` comments
    allowed; exactly seven values must be present.
    """
    values = []
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            for tok in line.split():
                try:
                    values.append(float(tok))
                except ValueError:
                    raise ConfigError(f"bad coefficient {tok!r}",
                                      path=str(path), line=ln,
                                      category="config") from None
    if len(values) != 7:
        raise ConfigError(
            f"expected 7 coefficients c0..c6, found {len(values)}",
            path=str(path), category="config")
    return tuple(values)
