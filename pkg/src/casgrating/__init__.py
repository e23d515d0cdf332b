"""Casimir and electrostatic forces for corrugated sphere-plate setups.

Subpackages are imported lazily by the CLI; the most used names are
re-exported here for interactive work.
"""

from .constants import HBAR_C, KB, MatsubaraGrid, matsubara_grid, matsubara_xi
from .errors import (CasgratingError, ConfigError, ConvergenceError,
                     PropagationError)
from .materials import (GeneralizedPlasma, IdealMetal, Plasma, Vacuum,
                        eps_imag, fresnel, load_material_file)
from .numerics import NumericsConfig
from .lifshitz import (PlatePair, plate_plate_free_energy,
                       plate_plate_pressure)

__version__ = "0.1.0"

__all__ = [
    "HBAR_C", "KB", "MatsubaraGrid", "matsubara_grid", "matsubara_xi",
    "CasgratingError", "ConfigError", "ConvergenceError", "PropagationError",
    "GeneralizedPlasma", "IdealMetal", "Plasma", "Vacuum",
    "eps_imag", "fresnel", "load_material_file",
    "NumericsConfig", "PlatePair", "plate_plate_free_energy",
    "plate_plate_pressure",
    "__version__",
]
