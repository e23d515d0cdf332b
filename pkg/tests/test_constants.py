import numpy as np
import pytest
from hypothesis import given, strategies as st

from casgrating.constants import (EV_PER_NM2_TO_J_M2, EV_PER_NM3_TO_PA,
                                  EV_PER_NM_TO_N, HBAR_C, KB, matsubara_grid,
                                  matsubara_xi)


def test_unit_conversions_against_scipy_constants():
    sc = pytest.importorskip("scipy.constants")
    e = sc.elementary_charge
    assert EV_PER_NM_TO_N == pytest.approx(e / 1e-9, rel=1e-12)
    assert EV_PER_NM2_TO_J_M2 == pytest.approx(e / 1e-18, rel=1e-12)
    assert EV_PER_NM3_TO_PA == pytest.approx(e / 1e-27, rel=1e-12)
    assert KB == pytest.approx(sc.Boltzmann / e, rel=1e-9)
    hbar_c_ev_nm = sc.hbar * sc.c / e * 1e9
    assert HBAR_C == pytest.approx(hbar_c_ev_nm, rel=1e-9)


def test_matsubara_first_frequency_room_temperature():
    # 2 pi k_B T at 300 K
    assert matsubara_xi(1, 300.0) == pytest.approx(0.16243290522, rel=1e-9)
    assert matsubara_xi(0, 300.0) == 0.0


def test_matsubara_xi_array_and_scalar_agree():
    xs = matsubara_xi(np.arange(5), 77.0)
    assert xs.shape == (5,)
    for l in range(5):
        assert xs[l] == pytest.approx(matsubara_xi(l, 77.0), rel=1e-15)


@given(l=st.integers(min_value=0, max_value=10_000),
       t=st.floats(min_value=1.0, max_value=3000.0))
def test_matsubara_xi_linear_in_index(l, t):
    x1 = matsubara_xi(1, t)
    assert matsubara_xi(l, t) == pytest.approx(l * x1, rel=1e-12, abs=0.0)


@pytest.mark.parametrize("bad", [0.0, -10.0])
def test_matsubara_xi_rejects_bad_temperature(bad):
    with pytest.raises(ValueError):
        matsubara_xi(1, bad)


def test_matsubara_xi_rejects_negative_index():
    with pytest.raises(ValueError):
        matsubara_xi(-1, 300.0)


def test_matsubara_grid_weights_and_monotone_frequencies():
    grid = matsubara_grid(300.0, 1e-6, lambda l: np.exp(-l / 7.0))
    assert grid.indices[0] == 0
    assert grid.weights[0] == 0.5
    assert all(w == 1.0 for w in grid.weights[1:])
    f = grid.frequencies
    assert np.all(np.diff(f) > 0)
    # exp(-l/7) falls below 1e-6 of the accumulated sum near l ~ 7 ln(1e6)
    assert 90 <= len(grid) <= 120


def test_matsubara_grid_cap_raises():
    with pytest.raises(RuntimeError):
        matsubara_grid(300.0, 1e-12, lambda l: 1.0, l_max=50)
