"""Shared fixtures: reference geometry, cheap configs, reflection cache."""

import math
import os

import pytest

from casgrating.casimir_forces import ForceEngine, SphereGratingGeometry
from casgrating.grating_scatter import GratingProfile
from casgrating.materials import Plasma
from casgrating.numerics import NumericsConfig

# Reference experiment scale: Au-coated sphere with a sinusoidal imprint
# over a deep sinusoidal grating.
PERIOD = 574.7
A_PLATE = 85.4
A_IMPRINT = 13.7
RADIUS = 97000.0
TEMPERATURE = 300.0


def make_geometry(a1=A_PLATE, a2=A_IMPRINT, separation=120.0,
                  phase=0.5 * math.pi, material=None):
    mat = material or Plasma(omega_p=9.0)
    return SphereGratingGeometry(
        plate=GratingProfile(period=PERIOD, amplitude=a1, material=mat,
                             phase=0.5 * math.pi),
        imprint=GratingProfile(period=PERIOD, amplitude=a2, material=mat,
                               phase=0.5 * math.pi),
        radius=RADIUS,
        separation=separation,
        temperature=TEMPERATURE,
        phase=phase,
    )


# Cheap-but-honest settings for invariance and consistency tests where
# truncation error is symmetric and cancels from the tested relation.
CHEAP = dict(
    n_orders=6,
    kx_nodes=16,
    ky_nodes=6,
    zp_panel_nodes=(6, 4, 4),
    matsubara_sampling="sparse",
    sparse_head=4,
    sparse_ratio=1.8,
    matsubara_rel_tol=1e-2,
    substep_efolds=4.0,
)


def cheap_config(**overrides):
    kw = dict(CHEAP)
    kw.update(overrides)
    return NumericsConfig(**kw)


@pytest.fixture(scope="session", autouse=True)
def reflection_cache(tmp_path_factory):
    """Point the reflection-matrix disk cache at a per-session scratch dir
    unless the caller provides one (reusing a warm cache makes the heavy
    acceptance tests restartable)."""
    if not os.environ.get("CASIMIR_CACHE_DIR"):
        os.environ["CASIMIR_CACHE_DIR"] = str(
            tmp_path_factory.mktemp("refl_cache"))
    yield os.environ["CASIMIR_CACHE_DIR"]


@pytest.fixture(scope="session")
def cheap_engine():
    """Shared low-resolution engine on the reference geometry."""
    geo = make_geometry()
    return ForceEngine(geo, cheap_config(),
                       z_candidates=[120.0, 124.7, 180.0])
