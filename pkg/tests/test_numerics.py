import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from casgrating.numerics import (NumericsConfig, gauss_nodes,
                                 semi_infinite_nodes, shanks_limit,
                                 zprime_nodes)


def test_gauss_nodes_exact_on_polynomials():
    # n-point Gauss is exact through degree 2n - 1
    x, w = gauss_nodes(6, -1.5, 2.0)
    for p in range(12):
        got = w @ x ** p
        want = (2.0 ** (p + 1) - (-1.5) ** (p + 1)) / (p + 1)
        assert got == pytest.approx(want, rel=1e-13, abs=1e-13)


def test_semi_infinite_nodes_exponential_and_powerlaw():
    x, w = semi_infinite_nodes(48, 2.0)
    assert abs(w @ np.exp(-x) - 1.0) < 1e-10
    assert abs(w @ (1.0 / (1.0 + x) ** 2) - 1.0) < 1e-12
    x, w = semi_infinite_nodes(48, 1.0, offset=3.0)
    assert x.min() > 3.0
    want = quad(lambda t: math.exp(-t), 3.0, np.inf)[0]
    assert abs(w @ np.exp(-x) - want) < 1e-10 * want


def test_zprime_nodes_cover_semi_infinite_tail():
    cfg = NumericsConfig()
    z = 120.0
    zp, wz = zprime_nodes(z, cfg)
    assert zp.min() >= z
    # thermal-like 1/z'^2 tail integrates to z exactly under the map
    assert wz @ (z / zp) ** 2 * (1.0 / z) == pytest.approx(1.0, rel=1e-12)
    # exponential-decay head against quad
    want = quad(lambda s: math.exp(-0.05 * (s - z)), z, np.inf)[0]
    got = wz @ np.exp(-0.05 * (zp - z))
    assert got == pytest.approx(want, rel=1e-8)


def test_config_validation():
    with pytest.raises(ValueError):
        NumericsConfig(kx_nodes=8)
    with pytest.raises(ValueError):
        NumericsConfig(matsubara_sampling="stochastic")
    with pytest.raises(ValueError):
        NumericsConfig(xi0_fraction=0.0)
    with pytest.raises(ValueError):
        NumericsConfig(xi0_fraction=0.9)
    with pytest.raises(ValueError):
        NumericsConfig(zp_panel_nodes=(8, 8), zp_panel_edges=(0.0, 1.0))
    with pytest.raises(ValueError):
        NumericsConfig(n_orders_sequence=(10, 12))
    with pytest.raises(ValueError):
        NumericsConfig(n_orders_sequence=(14, 12, 16))
    with pytest.raises(ValueError):
        NumericsConfig(n_orders_sequence=(12, 14, 40))
    cfg = NumericsConfig(n_orders_sequence=(12, 14, 16))
    assert cfg.updated(ky_nodes=8).ky_nodes == 8


@given(limit=st.floats(-5.0, 5.0),
       c=st.floats(-3.0, 3.0).filter(lambda v: abs(v) > 1e-3),
       r=st.floats(-0.9, 0.9).filter(lambda v: abs(v) > 1e-3))
def test_shanks_exact_on_geometric_sequences(limit, c, r):
    x = np.array([limit + c * r ** k for k in (1, 2, 3)])
    got = shanks_limit(x[0], x[1], x[2])
    assert got == pytest.approx(limit, rel=1e-8, abs=1e-8)


def test_shanks_leaves_non_contracting_sequences_alone():
    # growing deltas: no extrapolation, return the last member
    assert shanks_limit(1.0, 1.1, 1.4) == 1.4
    # constant tail
    assert shanks_limit(2.0, 2.0, 2.0) == 2.0


def test_shanks_elementwise_mixed():
    x1 = np.array([1.5, 1.0])
    x2 = np.array([1.25, 1.1])
    x3 = np.array([1.125, 1.4])   # first contracts to 1, second diverges
    out = shanks_limit(x1, x2, x3)
    assert out[0] == pytest.approx(1.0, abs=1e-12)
    assert out[1] == 1.4
