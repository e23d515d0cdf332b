r"""Unit system and thermal (Matsubara) frequency helpers.

Internal unit conventions used across the package:

* lengths in nanometers,
* energies and imaginary frequencies :math:`\xi` in electronvolts,
* temperatures in kelvin,
* forces in newtons and areal energies in joule per square meter only at
  module boundaries.

With these choices the vacuum wavenumber associated with a Matsubara
frequency is ``q0 = xi / HBAR_C`` in 1/nm, and all scattering quantities
stay dimensionless or in powers of nm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# CODATA 2018 exact/recommended values.
HBAR_C = 197.3269804          # eV nm
KB = 8.617333262e-5           # eV / K
EPS0_SI = 8.8541878128e-12    # F / m
ELEMENTARY_CHARGE = 1.602176634e-19  # C (exact)

# Conversions out of the internal eV/nm system.
EV_PER_NM_TO_N = 1.602176634e-10      # 1 eV/nm  = 1.602...e-10 N
EV_PER_NM2_TO_J_M2 = 0.1602176634     # 1 eV/nm^2 = 0.1602... J/m^2
EV_PER_NM3_TO_PA = 1.602176634e8      # 1 eV/nm^3 = 1.602...e8 Pa


def matsubara_xi(l, temperature):
    r"""Matsubara frequency :math:`\xi_l = 2\pi k_B T\, l` in eV.

    Parameters
    ----------
    l : int or array_like
        Matsubara index, ``l >= 0``.
    temperature : float
        Temperature in K, must be positive.

    Returns
    -------
    float or ndarray
        Frequency in eV; ``l = 0`` maps to exactly 0.
    """
    if temperature <= 0.0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    larr = np.asarray(l)
    if np.any(larr < 0):
        raise ValueError("Matsubara index must be >= 0")
    out = 2.0 * np.pi * KB * temperature * larr
    if np.ndim(l) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class MatsubaraGrid:
    """Truncated Matsubara sum with weights.

    Attributes
    ----------
    temperature : float
        Temperature in K.
    indices : tuple of int
        Included indices, always starting at 0.
    weights : tuple of float
        Summation weights; 1/2 for ``l = 0``, 1 otherwise.
    rel_tol : float
        Relative tail tolerance the truncation was built for.
    """

    temperature: float
    indices: tuple
    weights: tuple
    rel_tol: float

    @property
    def frequencies(self):
        """Frequencies ``xi_l`` in eV as an ndarray."""
        return matsubara_xi(np.asarray(self.indices), self.temperature)

    def __len__(self):
        return len(self.indices)


def matsubara_grid(temperature, rel_tol, term_estimator, l_max=100000):
    r"""Build a truncated Matsubara grid from a decaying term estimator.

    The grid contains ``l = 0`` with weight 1/2 and consecutive ``l >= 1``
    with weight 1 until the estimated term drops below ``rel_tol`` times the
    accumulated estimate for two consecutive indices.

    Parameters
    ----------
    temperature : float
        Temperature in K, positive.
    rel_tol : float
        Relative truncation tolerance, in (0, 1).
    term_estimator : callable
        Map ``l -> float`` proportional to the magnitude of term ``l``.
        Only ratios matter.
    l_max : int, optional
        Hard cap; exceeding it raises.

    Returns
    -------
    MatsubaraGrid

    Raises
    ------
    RuntimeError
        If the estimator has not decayed below tolerance by ``l_max``.
    """
    if temperature <= 0.0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if not 0.0 < rel_tol < 1.0:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    indices = [0]
    weights = [0.5]
    accum = 0.5 * abs(term_estimator(0))
    below = 0
    l = 1
    while True:
        t = abs(term_estimator(l))
        indices.append(l)
        weights.append(1.0)
        accum += t
        below = below + 1 if t <= rel_tol * max(accum, 1e-300) else 0
        if below >= 2:
            break
        l += 1
        if l > l_max:
            raise RuntimeError(
                f"Matsubara truncation not reached by l_max={l_max} "
                f"(last term estimate {t:.3e}, accumulated {accum:.3e})")
    return MatsubaraGrid(temperature=temperature, indices=tuple(indices),
                         weights=tuple(weights), rel_tol=rel_tol)
