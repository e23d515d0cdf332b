import math

import numpy as np
import pytest

from casgrating.constants import HBAR_C, EV_PER_NM2_TO_J_M2
from casgrating.lifshitz import (PlateEnergyInterpolator, PlatePair,
                                 free_energy_ev_nm2, plate_plate_free_energy,
                                 plate_plate_pressure)
from casgrating.materials import IdealMetal, Plasma, Vacuum

# Frozen oracle: independent scipy.integrate.quad evaluation of the
# kperp-integral form, Matsubara-summed to 1e-14 tail, Au plasma
# omega_p = 9.0 eV at T = 300 K.
ORACLE_ENERGY_J_M2 = {
    100.0: -2.276877522700e-07,
    120.0: -1.430920695715e-07,
    200.0: -3.737998815034e-08,
}
ORACLE_PRESSURE_PA = {
    100.0: -5.752437039820e+00,
    120.0: -3.063233740335e+00,
    200.0: -5.018261523209e-01,
}


@pytest.mark.parametrize("z", sorted(ORACLE_ENERGY_J_M2))
def test_plasma_energy_matches_independent_oracle(z):
    pair = PlatePair(material=Plasma(omega_p=9.0), separation=z,
                     temperature=300.0)
    got = plate_plate_free_energy(pair)
    assert got == pytest.approx(ORACLE_ENERGY_J_M2[z], rel=2e-6)


@pytest.mark.parametrize("z", sorted(ORACLE_PRESSURE_PA))
def test_plasma_pressure_matches_independent_oracle(z):
    pair = PlatePair(material=Plasma(omega_p=9.0), separation=z,
                     temperature=300.0)
    got = plate_plate_pressure(pair)
    assert got == pytest.approx(ORACLE_PRESSURE_PA[z], rel=2e-6)


def test_ideal_metal_low_temperature_closed_form():
    # -pi^2 hbar c / 720 z^3 per unit area; thermal corrections are
    # O((2 pi k_B T z / hbar c)^3) ~ 1e-8 at 1 K and z = 100 nm
    z = 100.0
    pair = PlatePair(material=IdealMetal(), separation=z, temperature=1.0)
    want = -math.pi ** 2 * HBAR_C / (720.0 * z ** 3) * EV_PER_NM2_TO_J_M2
    assert plate_plate_free_energy(pair) == pytest.approx(want, rel=1e-4)


def test_pressure_is_energy_derivative():
    mat = Plasma(omega_p=9.0)
    z, h = 150.0, 0.5
    e1 = free_energy_ev_nm2(mat, z - h, 300.0)
    e2 = free_energy_ev_nm2(mat, z + h, 300.0)
    fd = -(e2 - e1) / (2.0 * h)        # eV/nm^3
    p = plate_plate_pressure(PlatePair(material=mat, separation=z,
                                       temperature=300.0)) / 1.602176634e8
    assert p == pytest.approx(fd, rel=5e-4)


def test_attractive_and_monotone():
    mat = Plasma(omega_p=9.0)
    es = [free_energy_ev_nm2(mat, z, 300.0) for z in (80.0, 120.0, 180.0)]
    assert all(e < 0.0 for e in es)
    assert es[0] < es[1] < es[2]


def test_vacuum_gives_zero():
    pair = PlatePair(material=Vacuum(), separation=100.0, temperature=300.0)
    assert plate_plate_free_energy(pair) == 0.0


def test_ideal_metal_bounds_real_metal():
    z, t = 120.0, 300.0
    e_au = free_energy_ev_nm2(Plasma(omega_p=9.0), z, t)
    e_im = free_energy_ev_nm2(IdealMetal(), z, t)
    assert e_im < e_au < 0.0


def test_interpolator_tracks_direct_evaluation():
    mat = Plasma(omega_p=9.0)
    interp = PlateEnergyInterpolator(mat, 300.0, 90.0, 260.0)
    for z in (95.0, 133.7, 221.4):
        want = free_energy_ev_nm2(mat, z, 300.0)
        assert interp(z) == pytest.approx(want, rel=1e-8)
    zs = np.array([100.0, 150.0])
    np.testing.assert_allclose(
        interp(zs),
        [free_energy_ev_nm2(mat, z, 300.0) for z in zs], rtol=1e-8)
    with pytest.raises(ValueError):
        interp(50.0)


def test_pair_validation():
    with pytest.raises(ValueError):
        PlatePair(material=Vacuum(), separation=-1.0, temperature=300.0)
    with pytest.raises(ValueError):
        PlatePair(material=Vacuum(), separation=100.0, temperature=0.0)
