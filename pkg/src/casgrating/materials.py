r"""Dielectric models along the imaginary frequency axis and Fresnel data.

Every model evaluates the permittivity :math:`\varepsilon(i\xi)` for
:math:`\xi > 0` in eV. Supported variants:

``IdealMetal``
    Perfect reflector, :math:`|r| = 1` for both polarizations at all
    frequencies. Has no finite permittivity.
``Plasma``
    :math:`\varepsilon(i\xi) = 1 + \omega_p^2/\xi^2`.
``GeneralizedPlasma``
    Plasma core plus a sum of Lorentz oscillators describing interband
    transitions,

    .. math::

        \varepsilon(i\xi) = 1 + \frac{\omega_p^2}{\xi^2}
            + \sum_j \frac{g_j}{\omega_j^2 + \xi^2 + \gamma_j \xi}.

``Vacuum``
    :math:`\varepsilon = 1`; reflections vanish identically. Exists for
    null tests and is not reachable from data files.

Reflection coefficients follow the convention

.. math::

    r_{\rm TM} = \frac{\varepsilon q - k}{\varepsilon q + k},
    \qquad
    r_{\rm TE} = \frac{q - k}{q + k},

with :math:`q = \sqrt{k_\perp^2 + \xi^2/(\hbar c)^2}` and
:math:`k = \sqrt{k_\perp^2 + \varepsilon\, \xi^2/(\hbar c)^2}`, so an ideal
metal gives :math:`(r_{\rm TE}, r_{\rm TM}) = (-1, +1)`. At :math:`\xi = 0`
the plasma-like models use the finite limit forms: :math:`r_{\rm TM} = 1`
and :math:`r_{\rm TE}` built from
:math:`\varepsilon \xi^2/(\hbar c)^2 \to (\omega_p/\hbar c)^2`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .constants import HBAR_C
from .errors import ConfigError


@dataclass(frozen=True)
class IdealMetal:
    """Perfectly reflecting mirror."""

    source_label: str = "ideal metal"


@dataclass(frozen=True)
class Plasma:
    """Single-parameter plasma model, ``omega_p`` in eV."""

    omega_p: float
    source_label: str = ""

    def __post_init__(self):
        if self.omega_p <= 0.0:
            raise ValueError(f"omega_p must be positive, got {self.omega_p}")


@dataclass(frozen=True)
class GeneralizedPlasma:
    """Plasma core plus Lorentz oscillators.

    ``oscillators`` is a tuple of ``(g_j, omega_j, gamma_j)`` triples in
    eV^2, eV, eV.
    """

    omega_p: float
    oscillators: tuple = field(default_factory=tuple)
    source_label: str = ""

    def __post_init__(self):
        if self.omega_p <= 0.0:
            raise ValueError(f"omega_p must be positive, got {self.omega_p}")
        for j, (g, w, gam) in enumerate(self.oscillators):
            if g < 0.0 or w <= 0.0 or gam < 0.0:
                raise ValueError(
                    f"oscillator {j}: need g >= 0, omega > 0, gamma >= 0, "
                    f"got ({g}, {w}, {gam})")


@dataclass(frozen=True)
class Vacuum:
    """Unit permittivity; all reflections vanish. Test model."""

    source_label: str = "vacuum"


def eps_imag(material, xi):
    r"""Permittivity :math:`\varepsilon(i\xi)` for ``xi > 0`` in eV.

    Raises for ``IdealMetal`` (no finite permittivity) and for ``xi <= 0``.
    """
    if xi <= 0.0:
        raise ValueError(f"xi must be positive, got {xi}")
    if isinstance(material, Vacuum):
        return 1.0
    if isinstance(material, Plasma):
        return 1.0 + (material.omega_p / xi) ** 2
    if isinstance(material, GeneralizedPlasma):
        eps = 1.0 + (material.omega_p / xi) ** 2
        for g, w, gam in material.oscillators:
            eps += g / (w * w + xi * xi + gam * xi)
        return eps
    if isinstance(material, IdealMetal):
        raise ValueError("ideal metal has no finite permittivity")
    raise TypeError(f"unknown material model {type(material).__name__}")


def _plasma_kernel_sq(material):
    # limit of eps * xi^2 / (hbar c)^2 as xi -> 0, in 1/nm^2
    return (material.omega_p / HBAR_C) ** 2


def fresnel(material, xi, kperp):
    r"""Reflection pair ``(r_te, r_tm)`` at imaginary frequency.

    Parameters
    ----------
    material : model instance
    xi : float
        Imaginary frequency in eV, ``xi >= 0``.
    kperp : float
        Transverse wavenumber in 1/nm, ``kperp >= 0``. ``xi`` and ``kperp``
        must not both vanish.

    Returns
    -------
    (float, float)
        ``(r_te, r_tm)``; both lie in [-1, 1].
    """
    if xi < 0.0 or kperp < 0.0:
        raise ValueError("xi and kperp must be non-negative")
    if xi == 0.0 and kperp == 0.0:
        raise ValueError("xi and kperp must not both vanish")
    if isinstance(material, IdealMetal):
        return -1.0, 1.0
    if isinstance(material, Vacuum):
        return 0.0, 0.0
    q0sq = (xi / HBAR_C) ** 2
    q = math.sqrt(kperp * kperp + q0sq)
    if xi == 0.0:
        # plasma-like static limits: TM saturates, TE keeps the plasma kernel
        k = math.sqrt(kperp * kperp + _plasma_kernel_sq(material))
        return (q - k) / (q + k), 1.0
    eps = eps_imag(material, xi)
    k = math.sqrt(kperp * kperp + eps * q0sq)
    r_te = (q - k) / (q + k)
    r_tm = (eps * q - k) / (eps * q + k)
    return r_te, r_tm


def load_material_file(path):
    """Parse a conductivity model from a text file.

    Format: comment lines start with ``#``; the first payload line is a
    header, one of::

        model ideal_metal
        model plasma omega_p=<eV>
        model generalized_plasma omega_p=<eV>

    and for ``generalized_plasma`` each following payload line holds one
    oscillator as three floats ``g_j omega_j gamma_j``.

    Returns the model instance with ``source_label`` set to the file path.
    """
    path = str(path)
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.readlines()

    payload = []   # (line_no, text)
    for i, line in enumerate(raw, start=1):
        text = line.split("#", 1)[0].strip()
        if text:
            payload.append((i, text))
    if not payload:
        raise ConfigError("no payload lines", path=path, category="material")

    line_no, header = payload[0]
    toks = header.split()
    if len(toks) < 2 or toks[0] != "model":
        raise ConfigError(f"expected 'model <name> ...', got {header!r}",
                          path=path, line=line_no, category="material")
    name = toks[1]

    def _omega_p():
        for tok in toks[2:]:
            if tok.startswith("omega_p="):
                try:
                    return float(tok.split("=", 1)[1])
                except ValueError:
                    raise ConfigError(f"bad omega_p in {tok!r}", path=path,
                                      line=line_no, category="material")
        raise ConfigError("missing omega_p=<eV>", path=path, line=line_no,
                          category="material")

    if name == "ideal_metal":
        if len(payload) > 1:
            raise ConfigError("unexpected data after ideal_metal header",
                              path=path, line=payload[1][0],
                              category="material")
        return IdealMetal(source_label=path)
    if name == "plasma":
        if len(payload) > 1:
            raise ConfigError("unexpected data after plasma header",
                              path=path, line=payload[1][0],
                              category="material")
        return Plasma(omega_p=_omega_p(), source_label=path)
    if name == "generalized_plasma":
        osc = []
        for ln, text in payload[1:]:
            parts = text.split()
            if len(parts) != 3:
                raise ConfigError(
                    f"oscillator row needs 3 floats, got {text!r}",
                    path=path, line=ln, category="material")
            try:
                osc.append(tuple(float(p) for p in parts))
            except ValueError:
                raise ConfigError(f"non-numeric oscillator row {text!r}",
                                  path=path, line=ln, category="material")
        if not osc:
            raise ConfigError("generalized_plasma needs oscillator rows",
                              path=path, line=line_no, category="material")
        return GeneralizedPlasma(omega_p=_omega_p(), oscillators=tuple(osc),
                                 source_label=path)
    raise ConfigError(f"unknown model {name!r}", path=path, line=line_no,
                      category="material")
