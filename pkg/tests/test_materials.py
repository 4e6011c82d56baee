import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from casqbm.config import ParticleSpec
from casqbm.constants import EPS0, HBAR, KB
from casqbm.materials import (GOLD_DRUDE, SILICA_FUSED, MaterialDomainError, PerfectConductor,
                              PerfectConductorError, Vacuum, coth_factor, permittivity,
                              polarizability, preset, thermal_occupancy)

W0 = 1.771e15


@pytest.fixture
def sphere():
    return ParticleSpec(72e-9, 2000.0, SILICA_FUSED)


def test_gold_drude_value():
    eps = permittivity(GOLD_DRUDE, W0)
    assert eps.real == pytest.approx(-58.9, abs=0.3)
    assert eps.imag == pytest.approx(1.80, abs=0.02)


def test_silica_static_and_transparency():
    assert permittivity(SILICA_FUSED, 0.0).real == pytest.approx(3.94, abs=0.01)
    assert permittivity(SILICA_FUSED, 1j * 1e22) == pytest.approx(1.0, abs=1e-10)


def test_imaginary_axis_real_and_above_one():
    xi = np.geomspace(1e10, 1e19, 50)
    eps = permittivity(SILICA_FUSED, 1j * xi)
    assert not np.iscomplexobj(eps)
    assert np.all(eps >= 1.0)
    assert isinstance(permittivity(GOLD_DRUDE, 1j * 1e14), float)


@settings(max_examples=50, deadline=None)
@given(w=st.floats(1e10, 1e18))
def test_passivity(w):
    assert permittivity(SILICA_FUSED, w).imag >= 0
    assert permittivity(GOLD_DRUDE, w).imag >= 0


def test_errors():
    with pytest.raises(MaterialDomainError):
        permittivity(GOLD_DRUDE, 0.0)
    with pytest.raises(PerfectConductorError):
        permittivity(PerfectConductor(), W0)
    with pytest.raises(KeyError):
        preset("adamantium")


def test_kramers_kronig():
    # ε(iξ) - 1 = (2/π) ∫ ω Im ε(ω) / (ω² + ξ²) dω
    for xi in (5e13, 1e15, 3e16):
        pts = [o.resonance for o in SILICA_FUSED.oscillators]

        def integrand(w):
            return w * permittivity(SILICA_FUSED, w).imag / (w**2 + xi**2)

        total = quad(integrand, 0, 1e15, points=pts[:1], limit=400)[0]
        total += quad(integrand, 1e15, 1e18, points=pts[1:], limit=400)[0]
        total += quad(integrand, 1e18, np.inf, limit=200)[0]
        kk = 1.0 + 2.0 / math.pi * total
        assert kk == pytest.approx(permittivity(SILICA_FUSED, 1j * xi), rel=0.01)


def test_polarizability_values(sphere):
    assert polarizability(sphere, 1e6) == pytest.approx(2.06e-32, rel=0.01)
    v = 4 / 3 * math.pi * 72e-9**3
    eps = permittivity(SILICA_FUSED, W0)
    exact = 3 * EPS0 * v * (eps - 1) / (eps + 2)
    real = polarizability(sphere, W0)
    assert isinstance(real, float) and real == exact.real
    assert polarizability(sphere, W0, mode="complex") == pytest.approx(exact)


def test_polarizability_vacuum_and_imaginary_axis(sphere):
    vac = ParticleSpec(72e-9, 2000.0, Vacuum())
    assert polarizability(vac, W0) == 0.0
    xi = np.geomspace(1e10, 1e19, 200)
    a = polarizability(sphere, 1j * xi)
    assert np.all(a > 0)
    assert np.all(np.diff(a) < 0)


def test_polarizability_pole():
    from casqbm.materials import Drude
    # a lossless Drude particle with ε = -2 at ω = ωp/√3
    p = ParticleSpec(1e-8, 1000.0, Drude(1e16, 0.0), "complex")
    with pytest.raises(MaterialDomainError):
        polarizability(p, 1e16 / math.sqrt(3.0))


def test_thermal_occupancy():
    assert thermal_occupancy(W0, 0.0) == 0.0
    t = 300.0
    w = KB * t * math.log(2.0) / HBAR
    assert thermal_occupancy(w, t) == pytest.approx(1.0, rel=1e-12)
    assert thermal_occupancy(W0, 300.0) == pytest.approx(2.6e-20, rel=0.05)
    with pytest.raises(MaterialDomainError):
        thermal_occupancy(0.0, 300.0)


def test_coth_identity():
    t = 300.0
    x = np.geomspace(0.01, 50, 200)
    w = x * KB * t / HBAR
    lhs = 2 * thermal_occupancy(w, t) + 1
    rhs = 1 / np.tanh(x / 2)
    assert np.max(np.abs(lhs / rhs - 1)) < 1e-12
    assert np.allclose(coth_factor(w, t), rhs, rtol=1e-14)
    assert np.all(coth_factor(w, 0.0) == 1.0)
