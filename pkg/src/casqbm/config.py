"""Scenario configuration: particle, surface, drive, environment and z grid.

Configuration files are TOML with the sections ``[particle]``, ``[surface]``,
``[drive]``, ``[environment]`` and ``[grid]``; all values are SI. The keys are
listed in the README.
"""

from __future__ import annotations

import hashlib
import math
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .constants import C, EPS0
from .materials import PermittivityModel, model_from_dict, polarizability


class ConfigError(ValueError):
    """Invalid or incomplete configuration; the message names the key path."""


@dataclass(frozen=True)
class ParticleSpec:
    """Homogeneous dielectric sphere."""

    radius: float
    mass_density: float
    permittivity: PermittivityModel
    polarizability_mode: str = "real"

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigError("particle.radius must be > 0")
        if not self.mass_density > 0:
            raise ConfigError("particle.mass_density must be > 0")
        if self.polarizability_mode not in ("real", "complex"):
            raise ConfigError("particle.polarizability_mode must be 'real' or 'complex'")

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * math.pi * self.radius**3

    @property
    def mass(self) -> float:
        return self.mass_density * self.volume


@dataclass(frozen=True)
class StandingWaveProfile:
    """Real field amplitude E(z) = E_max cos(k0 (z - z_peak)) in front of the surface.

    ``phase`` locates the first antinode at z_peak = (π/2 - phase)/k0; the
    default phase 0 puts a node on the surface (perfect mirror).
    """

    amplitude_max: float
    k0: float
    phase: float = 0.0

    @property
    def z_peak(self) -> float:
        return (0.5 * math.pi - self.phase) / self.k0

    def amplitude(self, z):
        return self.amplitude_max * np.cos(self.k0 * (np.asarray(z) - self.z_peak))

    def derivative(self, z):
        return -self.amplitude_max * self.k0 * np.sin(self.k0 * (np.asarray(z) - self.z_peak))


@dataclass(frozen=True)
class DriveSpec:
    """Trapping laser, polarized along x.

    ``trap_frequency`` (rad/s) is an independent input; it is only used when
    the intensity is back-solved from it.
    """

    wavelength: float
    intensity: float
    phase: float = 0.0
    trap_frequency: float = 2.0 * math.pi * 3.0e6

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ConfigError("drive.wavelength must be > 0")
        if not self.intensity >= 0:
            raise ConfigError("drive.intensity must be >= 0")
        if not self.trap_frequency > 0:
            raise ConfigError("drive.trap_frequency must be > 0")

    @property
    def omega0(self) -> float:
        return 2.0 * math.pi * C / self.wavelength

    @property
    def k0(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def amplitude(self) -> float:
        """Peak field |E0| from I = ε0 c |E0|² / 2."""
        return math.sqrt(2.0 * self.intensity / (EPS0 * C))


@dataclass(frozen=True)
class ScenarioConfig:
    particle: ParticleSpec
    surface: PermittivityModel
    drive: DriveSpec
    temperature: float = 300.0
    distance_grid: tuple = ()
    coth_convention: str = "kernel"
    gas_pressures: tuple = ()
    gas_molecule_mass: float = 5e-26
    blackbody_temperatures: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "distance_grid", tuple(float(z) for z in self.distance_grid))
        object.__setattr__(self, "gas_pressures", tuple(float(p) for p in self.gas_pressures))
        object.__setattr__(self, "blackbody_temperatures",
                           tuple(float(t) for t in self.blackbody_temperatures))
        if not self.temperature >= 0:
            raise ConfigError("environment.temperature must be >= 0")
        if any(not z > 0 for z in self.distance_grid):
            raise ConfigError("grid.z values must all be > 0")
        if self.coth_convention not in ("kernel", "literal"):
            raise ConfigError("environment.coth_convention must be 'kernel' or 'literal'")
        if any(not p >= 0 for p in self.gas_pressures):
            raise ConfigError("environment.gas_pressures must be >= 0")
        if not self.gas_molecule_mass > 0:
            raise ConfigError("environment.gas_molecule_mass must be > 0")
        if any(not t > 0 for t in self.blackbody_temperatures):
            raise ConfigError("environment.blackbody_temperatures must be > 0")

    # derived quantities
    @property
    def mass(self) -> float:
        return self.particle.mass

    @property
    def omega0(self) -> float:
        return self.drive.omega0

    @property
    def k0(self) -> float:
        return self.drive.k0

    @property
    def e_max(self) -> float:
        return self.drive.amplitude

    @property
    def field_profile(self) -> StandingWaveProfile:
        return StandingWaveProfile(self.drive.amplitude, self.drive.k0, self.drive.phase)

    def z_tilde(self, z):
        """Dimensionless distance k0 z."""
        return self.k0 * np.asarray(z)

    def alpha0(self) -> float:
        """Particle polarizability at the drive frequency."""
        return polarizability(self.particle, self.omega0)


# -- parsing -----------------------------------------------------------------

def _get(doc, path, default=None, required=True):
    node = doc
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if required and default is None:
                raise ConfigError(f"missing key {path}")
            return default
        node = node[part]
    return node


def _num(doc, path, default=None):
    v = _get(doc, path, default)
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{path} must be a number, got {v!r}") from None


def _model(doc, section):
    sec = _get(doc, section)
    spec = dict(sec)
    if "material" in spec:
        spec = {"preset": spec["material"]}
    try:
        return model_from_dict(spec)
    except KeyError as exc:
        raise ConfigError(f"{section}: {exc.args[0]}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from None


def _grid(doc, k0):
    grid = doc.get("grid", {})
    if "z" in grid:
        return tuple(float(z) for z in grid["z"])
    if "z_tilde_min" in grid:
        lo = _num(doc, "grid.z_tilde_min")
        hi = _num(doc, "grid.z_tilde_max")
        n = int(_get(doc, "grid.points"))
        if not (0 < lo <= hi) or n < 1:
            raise ConfigError("grid: need 0 < z_tilde_min <= z_tilde_max and points >= 1")
        return tuple(np.geomspace(lo, hi, n) / k0)
    return ()


def config_from_dict(doc: dict) -> ScenarioConfig:
    """Build and validate a ScenarioConfig from a parsed document."""
    try:
        particle = ParticleSpec(
            radius=_num(doc, "particle.radius"),
            mass_density=_num(doc, "particle.mass_density"),
            permittivity=_model(doc, "particle"),
            polarizability_mode=str(_get(doc, "particle.polarizability_mode", "real")),
        )
        if not particle.permittivity.finite:
            raise ConfigError("particle: a perfect conductor is not a valid particle material")
        surface = _model(doc, "surface")
        drive = DriveSpec(
            wavelength=_num(doc, "drive.wavelength"),
            intensity=_num(doc, "drive.intensity"),
            phase=_num(doc, "drive.phase", 0.0),
            trap_frequency=_num(doc, "drive.trap_frequency", 2.0 * math.pi * 3.0e6),
        )
        env = doc.get("environment", {})
        return ScenarioConfig(
            particle=particle,
            surface=surface,
            drive=drive,
            temperature=_num(doc, "environment.temperature"),
            distance_grid=_grid(doc, drive.k0),
            coth_convention=str(env.get("coth_convention", "kernel")),
            gas_pressures=tuple(env.get("gas_pressures", ())),
            gas_molecule_mass=float(env.get("gas_molecule_mass", 5e-26)),
            blackbody_temperatures=tuple(env.get("blackbody_temperatures", ())),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def parse_document(text: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config does not parse: {exc}") from None


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply ``section.key=value`` overrides; values are parsed as TOML literals."""
    import copy

    doc = copy.deepcopy(doc)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        path, raw = (s.strip() for s in item.split("=", 1))
        try:
            value = tomllib.loads(f"v = {raw}")["v"]
        except tomllib.TOMLDecodeError:
            value = raw
        node = doc
        parts = path.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path {path} crosses a non-table value")
        node[parts[-1]] = value
        if parts[-1] == "material":  # a preset replaces any explicit model
            for k in ("model", "plasma_frequency", "damping", "oscillators"):
                node.pop(k, None)
        elif parts[-1] == "model":
            node.pop("material", None)
        if parts[0] == "grid" and parts[-1] != "z":
            node.pop("z", None)
    return doc


def load_config(document, overrides=()) -> ScenarioConfig:
    """Parse configuration text (or an already-parsed mapping) into a ScenarioConfig."""
    doc = dict(document) if isinstance(document, dict) else parse_document(document)
    return config_from_dict(apply_overrides(doc, overrides))


def default_config_text() -> str:
    return resources.files("casqbm").joinpath("data/default.toml").read_text()


def read_config(path, overrides=()) -> ScenarioConfig:
    """Load a config file; the name ``default`` selects the bundled defaults."""
    if str(path) == "default":
        return load_config(default_config_text(), overrides)
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"config file {p} not found")
    return load_config(p.read_text(), overrides)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    particle = {"radius": cfg.particle.radius, "mass_density": cfg.particle.mass_density,
                "polarizability_mode": cfg.particle.polarizability_mode}
    particle.update(cfg.particle.permittivity.to_dict())
    return {
        "particle": particle,
        "surface": cfg.surface.to_dict(),
        "drive": {"wavelength": cfg.drive.wavelength, "intensity": cfg.drive.intensity,
                  "phase": cfg.drive.phase, "trap_frequency": cfg.drive.trap_frequency},
        "environment": {"temperature": cfg.temperature,
                        "coth_convention": cfg.coth_convention,
                        "gas_pressures": list(cfg.gas_pressures),
                        "gas_molecule_mass": cfg.gas_molecule_mass,
                        "blackbody_temperatures": list(cfg.blackbody_temperatures)},
        "grid": {"z": list(cfg.distance_grid)},
    }


def dump_config(cfg: ScenarioConfig) -> str:
    """Serialize to TOML; ``load_config(dump_config(c)) == c``."""
    return tomli_w.dumps(config_to_dict(cfg))


def config_hash(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()[:16]


def derive_intensity_from_omega(cfg: ScenarioConfig) -> ScenarioConfig:
    """Return a copy whose intensity reproduces ``drive.trap_frequency`` at an antinode.

    Uses Ω_Tr² = α k0² |E0|² / (2M).
    """
    alpha = cfg.alpha0()
    e2 = 2.0 * cfg.mass * cfg.drive.trap_frequency**2 / (alpha * cfg.k0**2)
    intensity = 0.5 * EPS0 * C * e2
    return replace(cfg, drive=replace(cfg.drive, intensity=intensity))
