import math
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casqbm.envdec import GasSpec, blackbody_alpha, lambda_blackbody, lambda_gas, thermal_frequency
from casqbm.materials import polarizability


def test_gas_reference_value(cfg):
    # 1e-11 mbar, 300 K, 5e-26 kg molecules on a 72 nm sphere
    got = lambda_gas(GasSpec(1e-9, 5e-26, 300.0), cfg.particle)
    assert got == pytest.approx(4.48e22, rel=2e-3)


def test_gas_zero_pressure(cfg):
    assert lambda_gas(GasSpec(0.0), cfg.particle) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-12, 1e5), st.floats(1.1, 10.0))
def test_gas_linear_in_pressure(cfg, p, k):
    a = lambda_gas(GasSpec(p), cfg.particle)
    assert lambda_gas(GasSpec(k * p), cfg.particle) == pytest.approx(k * a, rel=1e-12)


def test_gas_scalings(cfg):
    a = lambda_gas(GasSpec(1.0, 5e-26, 300.0), cfg.particle)
    assert lambda_gas(GasSpec(1.0, 2e-25, 300.0), cfg.particle) == pytest.approx(2 * a, rel=1e-12)
    assert lambda_gas(GasSpec(1.0, 5e-26, 1200.0), cfg.particle) == pytest.approx(2 * a, rel=1e-12)


def test_gas_spec_validation():
    with pytest.raises(ValueError):
        GasSpec(-1.0)
    with pytest.raises(ValueError):
        GasSpec(1.0, temperature=0.0)


def test_blackbody_ninth_power(cfg):
    a = polarizability(cfg.particle, 0j).real
    ref = lambda_blackbody(10.0, cfg.particle, alpha=a)
    for t in (3.0, 30.0, 100.0):
        assert lambda_blackbody(t, cfg.particle, alpha=a) == pytest.approx(ref * (t / 10) ** 9, rel=1e-12)


def test_blackbody_zero_and_negative(cfg):
    assert lambda_blackbody(0.0, cfg.particle) == 0.0
    with pytest.raises(ValueError):
        lambda_blackbody(-1.0, cfg.particle)


def test_blackbody_monotone(cfg):
    vals = [lambda_blackbody(t, cfg.particle) for t in (1, 3, 10, 30, 100)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_blackbody_reference_values(cfg):
    assert lambda_blackbody(1.0, cfg.particle) == pytest.approx(6.76e-8, rel=3e-3)
    assert lambda_blackbody(10.0, cfg.particle) == pytest.approx(67.7, rel=3e-3)


def test_thermal_frequency():
    # Wien peak at 300 K is near 9.66 µm
    assert 2 * math.pi * 2.99792458e8 / thermal_frequency(300.0) == pytest.approx(9.659e-6, rel=1e-3)


def test_complex_alpha_warning(cfg):
    with pytest.warns(UserWarning, match="strongly complex"):
        a = blackbody_alpha(300.0, cfg.particle)
    assert a > 0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        blackbody_alpha(10.0, cfg.particle)
