import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from casgrating.constants import HBAR_C
from casgrating.errors import ConfigError
from casgrating.materials import (GeneralizedPlasma, IdealMetal, Plasma,
                                  Vacuum, eps_imag, fresnel,
                                  load_material_file)


def test_plasma_permittivity_formula():
    m = Plasma(omega_p=9.0)
    assert eps_imag(m, 3.0) == pytest.approx(1.0 + 9.0, rel=1e-15)
    assert eps_imag(m, 0.09) == pytest.approx(1.0 + 1e4, rel=1e-15)


def test_generalized_plasma_adds_oscillators():
    osc = ((100.0, 3.0, 0.5), (40.0, 7.0, 1.0))
    m = GeneralizedPlasma(omega_p=9.0, oscillators=osc)
    xi = 2.0
    want = 1.0 + (9.0 / xi) ** 2
    for g, w, gam in osc:
        want += g / (w * w + xi * xi + gam * xi)
    assert eps_imag(m, xi) == pytest.approx(want, rel=1e-15)


def test_vacuum_is_unity_and_ideal_metal_raises():
    assert eps_imag(Vacuum(), 1.0) == 1.0
    with pytest.raises(ValueError):
        eps_imag(IdealMetal(), 1.0)
    with pytest.raises(ValueError):
        eps_imag(Plasma(omega_p=9.0), 0.0)


def test_model_validation():
    with pytest.raises(ValueError):
        Plasma(omega_p=-1.0)
    with pytest.raises(ValueError):
        GeneralizedPlasma(omega_p=9.0, oscillators=((1.0, -2.0, 0.1),))


def test_fresnel_limits():
    assert fresnel(IdealMetal(), 1.0, 0.1) == (-1.0, 1.0)
    assert fresnel(Vacuum(), 1.0, 0.1) == (0.0, 0.0)
    # static TM limit of a plasma metal saturates at the ideal value
    r_te0, r_tm0 = fresnel(Plasma(omega_p=9.0), 0.0, 0.05)
    assert r_tm0 == 1.0
    k = math.sqrt(0.05 ** 2 + (9.0 / HBAR_C) ** 2)
    assert r_te0 == pytest.approx((0.05 - k) / (0.05 + k), rel=1e-12)


def test_fresnel_against_inline_formula():
    m = Plasma(omega_p=9.0)
    xi, kp = 0.7, 0.02
    eps = 1.0 + (9.0 / xi) ** 2
    q0 = xi / HBAR_C
    q = math.sqrt(kp * kp + q0 * q0)
    k = math.sqrt(kp * kp + eps * q0 * q0)
    r_te, r_tm = fresnel(m, xi, kp)
    assert r_te == pytest.approx((q - k) / (q + k), rel=1e-14)
    assert r_tm == pytest.approx((eps * q - k) / (eps * q + k), rel=1e-14)


@given(xi=st.floats(min_value=1e-4, max_value=100.0),
       kp=st.floats(min_value=0.0, max_value=1.0))
def test_fresnel_bounds(xi, kp):
    r_te, r_tm = fresnel(Plasma(omega_p=9.0), xi, kp)
    assert -1.0 <= r_te <= 0.0
    assert 0.0 <= r_tm <= 1.0


def test_fresnel_domain_errors():
    with pytest.raises(ValueError):
        fresnel(Plasma(omega_p=9.0), 0.0, 0.0)
    with pytest.raises(ValueError):
        fresnel(Plasma(omega_p=9.0), -1.0, 0.1)


def test_load_plasma_file(tmp_path):
    p = tmp_path / "m.dat"
    p.write_text("# comment\nmodel plasma omega_p=8.5\n")
    m = load_material_file(p)
    assert isinstance(m, Plasma)
    assert m.omega_p == 8.5
    assert m.source_label == str(p)


def test_load_generalized_plasma_file(tmp_path):
    p = tmp_path / "m.dat"
    p.write_text("model generalized_plasma omega_p=9.0\n"
                 "10.0 2.0 0.3\n"
                 "5.0 6.0 0.1  # inline comment\n")
    m = load_material_file(p)
    assert isinstance(m, GeneralizedPlasma)
    assert m.oscillators == ((10.0, 2.0, 0.3), (5.0, 6.0, 0.1))


def test_load_ideal_metal_file(tmp_path):
    p = tmp_path / "m.dat"
    p.write_text("model ideal_metal\n")
    assert isinstance(load_material_file(p), IdealMetal)


def test_load_material_error_carries_line_number(tmp_path):
    p = tmp_path / "m.dat"
    p.write_text("model generalized_plasma omega_p=9.0\n1.0 2.0\n")
    with pytest.raises(ConfigError) as exc:
        load_material_file(p)
    assert exc.value.line == 2


def test_load_material_rejects_junk_header(tmp_path):
    p = tmp_path / "m.dat"
    p.write_text("plasma 9.0\n")
    with pytest.raises(ConfigError):
        load_material_file(p)


def test_builtin_material_files_parse():
    from importlib.resources import files
    data = files("casgrating") / "data"
    au = load_material_file(str(data / "au_plasma.dat"))
    assert isinstance(au, Plasma)
    assert au.omega_p == pytest.approx(9.0)
    gen = load_material_file(str(data / "au_generalized_plasma.dat"))
    assert isinstance(gen, GeneralizedPlasma)
    assert len(gen.oscillators) >= 1
    # oscillators only add to the plasma background
    assert eps_imag(gen, 1.0) > eps_imag(au, 1.0)


def test_generalized_reduces_to_plasma_without_oscillators():
    a = Plasma(omega_p=9.0)
    b = GeneralizedPlasma(omega_p=9.0, oscillators=())
    for xi in (0.1, 1.0, 10.0):
        assert eps_imag(a, xi) == pytest.approx(eps_imag(b, xi), rel=1e-15)
        np.testing.assert_allclose(fresnel(a, xi, 0.03),
                                   fresnel(b, xi, 0.03), rtol=1e-14)
