"""Permittivity models, particle polarizability and thermal photon occupancy.

Frequencies are angular (rad/s). A model can be evaluated on the real axis
by passing a real ``omega`` or on the imaginary axis by passing ``1j * xi``;
the value returned for a purely imaginary argument is real.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import EPS0, HBAR, KB


class PerfectConductorError(ValueError):
    """Raised when a finite permittivity is requested from a perfect conductor."""


class MaterialDomainError(ValueError):
    """Raised for evaluations outside a model's domain (poles, negative frequency)."""


def _on_imaginary_axis(omega) -> bool:
    w = np.asarray(omega)
    return np.iscomplexobj(w) and bool(np.all(w.real == 0.0))


class PermittivityModel:
    """Base class for the half-space and particle dielectric models."""

    #: perfect conductors override this and have no finite permittivity
    finite = True

    def _eps(self, omega):
        raise NotImplementedError

    def epsilon(self, omega):
        """Relative permittivity at ``omega`` (real) or ``1j*xi`` (imaginary axis)."""
        imag_axis = _on_imaginary_axis(omega)
        w = np.asarray(omega, dtype=complex)
        eps = self._eps(w)
        if imag_axis:
            eps = eps.real
        if np.ndim(eps) == 0:
            return eps[()]
        return eps

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Vacuum(PermittivityModel):
    """ε = 1 everywhere; a surface made of this reflects nothing."""

    def _eps(self, omega):
        return np.ones_like(omega)

    def to_dict(self):
        return {"model": "vacuum"}


@dataclass(frozen=True)
class PerfectConductor(PermittivityModel):
    """Ideal mirror, handled at the level of reflection coefficients (rp=1, rs=-1)."""

    finite = False

    def _eps(self, omega):
        raise PerfectConductorError(
            "a perfect conductor has no finite permittivity; use its reflection shortcut"
        )

    def to_dict(self):
        return {"model": "perfect_conductor"}


@dataclass(frozen=True)
class Drude(PermittivityModel):
    """Free-electron metal, ε = 1 - ωp²/(ω² + iγω)."""

    plasma_frequency: float
    damping: float

    def __post_init__(self):
        if not self.plasma_frequency > 0:
            raise ValueError("Drude plasma_frequency must be > 0")
        if not self.damping >= 0:
            raise ValueError("Drude damping must be >= 0")

    def _eps(self, omega):
        if np.any(omega == 0):
            raise MaterialDomainError("Drude permittivity is singular at omega = 0")
        return 1.0 - self.plasma_frequency**2 / (omega**2 + 1j * self.damping * omega)

    def to_dict(self):
        return {"model": "drude", "plasma_frequency": self.plasma_frequency,
                "damping": self.damping}


@dataclass(frozen=True)
class Oscillator:
    """One Lorentz term ωp²/(ωT² - ω² - iγω)."""

    plasma_frequency: float
    resonance: float
    damping: float

    def __post_init__(self):
        if not (self.plasma_frequency > 0 and self.resonance > 0):
            raise ValueError("oscillator frequencies must be > 0")
        if not self.damping >= 0:
            raise ValueError("oscillator damping must be >= 0")


@dataclass(frozen=True)
class DrudeLorentz(PermittivityModel):
    """Sum of Lorentz oscillators, ε = 1 + Σ ωp,i²/(ωT,i² - ω² - iγ_i ω)."""

    oscillators: tuple

    def __post_init__(self):
        object.__setattr__(self, "oscillators", tuple(
            o if isinstance(o, Oscillator) else Oscillator(*o) for o in self.oscillators))
        if not self.oscillators:
            raise ValueError("DrudeLorentz needs at least one oscillator")

    def _eps(self, omega):
        eps = np.ones_like(omega)
        for o in self.oscillators:
            eps = eps + o.plasma_frequency**2 / (
                o.resonance**2 - omega**2 - 1j * o.damping * omega)
        return eps

    def to_dict(self):
        return {"model": "drude_lorentz",
                "oscillators": [[o.plasma_frequency, o.resonance, o.damping]
                                for o in self.oscillators]}


# Fused silica: two oscillators, frequencies taken as angular (rad/s).
SILICA_FUSED = DrudeLorentz((
    Oscillator(1.75e14, 1.32e14, 4.28e13),
    Oscillator(2.96e16, 2.72e16, 8.09e15),
))
GOLD_DRUDE = Drude(1.37e16, 5.31e13)

PRESETS = {
    "silica_fused": SILICA_FUSED,
    "gold_drude": GOLD_DRUDE,
    "perfect_conductor": PerfectConductor(),
    "vacuum": Vacuum(),
}


def preset(name: str) -> PermittivityModel:
    """Look up a named material model."""
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown material preset {name!r}; "
                       f"known: {', '.join(sorted(PRESETS))}") from None


def model_from_dict(d: dict) -> PermittivityModel:
    """Inverse of ``PermittivityModel.to_dict``; also accepts ``{"preset": name}``."""
    if "preset" in d:
        return preset(d["preset"])
    kind = d.get("model")
    if kind == "vacuum":
        return Vacuum()
    if kind == "perfect_conductor":
        return PerfectConductor()
    if kind == "drude":
        return Drude(float(d["plasma_frequency"]), float(d["damping"]))
    if kind == "drude_lorentz":
        return DrudeLorentz(tuple(Oscillator(*map(float, o)) for o in d["oscillators"]))
    raise KeyError(f"unknown permittivity model {kind!r}")


def permittivity(model: PermittivityModel, omega):
    """ε(ω) of ``model``; pass ``1j*xi`` for the imaginary axis."""
    return model.epsilon(omega)


def polarizability(particle, omega, mode: str | None = None):
    """Clausius-Mossotti polarizability α = 3ε₀V(ε-1)/(ε+2), in C m²/V.

    Parameters
    ----------
    particle : ParticleSpec
        Needs ``volume``, ``permittivity`` and ``polarizability_mode``.
    omega : float, complex or array
        Real frequency, or ``1j*xi`` for the imaginary axis.
    mode : {"real", "complex"}, optional
        Overrides ``particle.polarizability_mode``. In "real" mode the real
        part of the complex value is returned as a float.
    """
    mode = mode or particle.polarizability_mode
    eps = np.asarray(particle.permittivity.epsilon(omega), dtype=complex)
    denom = eps + 2.0
    if np.any(np.abs(denom) < 1e-12):
        raise MaterialDomainError("polarizability pole: particle permittivity equals -2")
    alpha = 3.0 * EPS0 * particle.volume * (eps - 1.0) / denom
    if mode == "real" or _on_imaginary_axis(omega):
        alpha = alpha.real
    elif mode != "complex":
        raise ValueError(f"unknown polarizability mode {mode!r}")
    return alpha[()] if alpha.ndim == 0 else alpha


def thermal_occupancy(omega, temperature):
    """Bose-Einstein occupancy 1/(exp(ħω/kT) - 1); exactly 0 at T = 0."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise MaterialDomainError("thermal occupancy needs omega > 0")
    if temperature < 0:
        raise MaterialDomainError("temperature must be >= 0")
    if temperature == 0:
        n = np.zeros_like(w)
    else:
        with np.errstate(over="ignore"):
            n = 1.0 / np.expm1(HBAR * w / (KB * temperature))
    return n[()] if n.ndim == 0 else n


def coth_factor(omega, temperature, literal=False):
    """coth(ħω/2kT) = 2 n_th + 1; ``literal=True`` drops the factor 2 in the argument."""
    w = np.asarray(omega, dtype=float)
    if temperature == 0:
        out = np.ones_like(w)
    else:
        x = HBAR * w / (KB * temperature) * (1.0 if literal else 0.5)
        with np.errstate(over="ignore"):
            out = 1.0 / np.tanh(x)
    return out[()] if out.ndim == 0 else out
