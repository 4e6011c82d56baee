"""Reference localization rates from background gas and blackbody scattering."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .constants import C, EPS0, HBAR, KB, WIEN_B
from .materials import polarizability

ZETA9 = 1.002


@dataclass(frozen=True)
class GasSpec:
    """Pressure (Pa), molecule mass (kg) and gas temperature (K)."""

    pressure: float
    molecule_mass: float = 5e-26
    temperature: float = 300.0

    def __post_init__(self):
        if self.pressure < 0:
            raise ValueError("pressure must be >= 0")
        if not (self.molecule_mass > 0 and self.temperature > 0):
            raise ValueError("molecule_mass and temperature must be > 0")


def lambda_gas(gas: GasSpec, particle) -> float:
    """Collisional localization (8/3ħ²)·P·sqrt(2πm)·R²·sqrt(kT) in Hz/m²."""
    return (8.0 / (3.0 * HBAR**2) * gas.pressure * math.sqrt(2.0 * math.pi * gas.molecule_mass)
            * particle.radius**2 * math.sqrt(KB * gas.temperature))


def thermal_frequency(temperature):
    """Wien peak angular frequency 2πcT/b."""
    return 2.0 * math.pi * C * temperature / WIEN_B


def blackbody_alpha(temperature, particle):
    """Polarizability at the Wien frequency, real part unless absorption dominates."""
    w = thermal_frequency(temperature)
    a = complex(polarizability(particle, w, mode="complex"))
    if abs(a.imag) > 0.1 * abs(a.real):
        warnings.warn(f"polarizability is strongly complex at omega_th = {w:.3e} rad/s; "
                      "using its magnitude", stacklevel=3)
        return abs(a)
    return a.real


def lambda_blackbody(temperature, particle, alpha=None) -> float:
    """Blackbody-scattering localization (8!c/18π)(α/πε0)²(kT/ħc)⁹ζ(9) in Hz/m².

    ``alpha`` freezes the polarizability (useful for scaling checks); by default
    it is evaluated at the Wien frequency of ``temperature``.
    """
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        return 0.0
    a = blackbody_alpha(temperature, particle) if alpha is None else alpha
    return (math.factorial(8) * C / (18.0 * math.pi) * (a / (math.pi * EPS0)) ** 2
            * (KB * temperature / (HBAR * C)) ** 9 * ZETA9)
