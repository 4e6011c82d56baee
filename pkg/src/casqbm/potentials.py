"""Trap, Casimir-Polder and drive-induced potentials; equilibrium and trap frequencies."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .constants import C, EPS0, HBAR, KB, MU0
from .greens import MethodError, components_array, scattering_components
from .materials import Vacuum, polarizability, thermal_occupancy
from .quad import QuadSpec, integrate_adaptive, integrate_matsubara_like

log = logging.getLogger(__name__)


class TrapLostError(RuntimeError):
    """∂z U_total has no sign change in the bracket."""


@dataclass(frozen=True)
class PotentialBreakdown:
    z: float
    u_trap: float
    u_cp: float
    u_dcp: float
    u_total: float

    def __post_init__(self):
        assert self.u_total == self.u_trap + self.u_cp + self.u_dcp


@dataclass(frozen=True)
class TrapSummary:
    """Equilibrium position and trap frequencies (rad/s).

    ``omega_cp`` and ``omega_dcp`` are signed: sign(Ω²)·sqrt(|Ω²|). When the
    total curvature is negative ``stable`` is False and ``omega_total`` is NaN.
    """

    z0: float
    omega_tr: float
    omega_cp: float
    omega_dcp: float
    omega_total: float
    omega_sq_total: float
    stable: bool


def _signed_sqrt(x):
    return math.copysign(math.sqrt(abs(x)), x)


def u_trap(cfg, z):
    """Time-averaged optical potential -α(ω0)|E0(z)|²/4 (J)."""
    return -0.25 * cfg.alpha0() * cfg.field_profile.amplitude(z) ** 2


def du_trap(cfg, z):
    prof = cfg.field_profile
    return -0.5 * cfg.alpha0() * prof.amplitude(z) * prof.derivative(z)


def trap_curvature(cfg, z):
    """∂z² u_trap = (α k0² E_max²/2) cos(2k0(z - z_peak)) (J/m²).

    At the antinode this is α k0² |E0|²/2, i.e. Ω_Tr² = α k0²|E0|²/(2M).
    """
    prof = cfg.field_profile
    return (0.5 * cfg.alpha0() * cfg.k0**2 * prof.amplitude_max**2
            * math.cos(2.0 * cfg.k0 * (z - prof.z_peak)))


def u_cp(cfg, z, rel_tol=1e-8):
    """Casimir-Polder potential of the particle at distance z (J).

    Sum of an imaginary-frequency integral over ξ²α(iξ)Tr G_sc(z, iξ) and,
    for T > 0, a real-frequency thermal term weighted by n_th(ω).
    """
    if not z > 0:
        raise ValueError("z must be > 0")
    surface = cfg.surface
    if isinstance(surface, Vacuum):
        return 0.0
    particle = cfg.particle

    def f_vac(xi):
        g = components_array(surface, z, 1j * xi, rel_tol)
        trace = 2.0 * g[:, 0].real + g[:, 1].real
        return xi**2 * polarizability(particle, 1j * xi) * trace

    vac = integrate_matsubara_like(f_vac, QuadSpec(rel_tol=rel_tol, tail_scale=C / (2.0 * z),
                                                   max_evaluations=100_000)).value
    u = HBAR * MU0 / (2.0 * math.pi) * vac
    if cfg.temperature > 0:
        def f_th(w):
            g = components_array(surface, z, w, rel_tol)
            trace_im = 2.0 * g[:, 0].imag + g[:, 1].imag
            alpha = polarizability(particle, w)
            return w**2 * thermal_occupancy(w, cfg.temperature) * np.real(alpha * trace_im)

        th = integrate_adaptive(f_th, 0.0, np.inf, QuadSpec(
            rel_tol=rel_tol, tail_scale=KB * cfg.temperature / HBAR, max_evaluations=100_000)).value
        u -= HBAR * MU0 / math.pi * th
    return float(u)


def _drive_prefactor(cfg):
    n = thermal_occupancy(cfg.omega0, cfg.temperature)
    return MU0 * cfg.omega0**2 * cfg.alpha0() ** 2 * (2.0 * n + 1.0)


def u_dcp(cfg, z, rel_tol=1e-8):
    """Drive-induced CP potential -(μ0ω0²α²/2)(2n+1)|E0(z)|² Re G_sc^xx (J)."""
    e = cfg.field_profile.amplitude(z)
    if e == 0 or isinstance(cfg.surface, Vacuum):
        return 0.0
    g = scattering_components(cfg.surface, z, cfg.omega0, rel_tol).g_xx
    return float(-0.5 * _drive_prefactor(cfg) * e**2 * g.real)


def potential_breakdown(cfg, z, rel_tol=1e-8) -> PotentialBreakdown:
    ut, uc, ud = float(u_trap(cfg, z)), u_cp(cfg, z, rel_tol), u_dcp(cfg, z, rel_tol)
    return PotentialBreakdown(float(z), ut, uc, ud, ut + uc + ud)


def gamma_scatter(cfg, z, method="full", rel_tol=1e-8):
    """Surface-modified photon scattering rate (1/s) for a particle at an antinode.

    ``full`` uses Im G_sc^xx(z, ω0); ``nearfield`` uses its z̃ ≪ 1 form
    α²|E0|²k0³ Im[(ε-1)/(ε+1)] / (8πħε0 z̃³). Both use the peak field |E0|.
    """
    e2 = cfg.e_max**2
    if method == "full":
        g = scattering_components(cfg.surface, z, cfg.omega0, rel_tol).g_xx
        return 4.0 * _drive_prefactor(cfg) / HBAR * e2 * g.imag
    if method == "nearfield":
        if not cfg.surface.finite:
            raise MethodError("near-field scattering rate needs a finite-permittivity surface")
        eps = complex(cfg.surface.epsilon(cfg.omega0))
        zt = cfg.k0 * z
        n = thermal_occupancy(cfg.omega0, cfg.temperature)
        return (cfg.alpha0() ** 2 * e2 * cfg.k0**3 * (2.0 * n + 1.0)
                / (8.0 * math.pi * HBAR * EPS0 * zt**3) * ((eps - 1.0) / (eps + 1.0)).imag)
    raise MethodError(f"unknown method {method!r}")


def _step(z):
    return max(1e-4 * z, 1e-12)


def richardson_first(f, z, h=None):
    h = h or _step(z)
    d1 = (f(z + h) - f(z - h)) / (2.0 * h)
    d2 = (f(z + h / 2) - f(z - h / 2)) / h
    return (4.0 * d2 - d1) / 3.0


def richardson_second(f, z, h=None):
    h = h or _step(z)
    f0 = f(z)
    s1 = (f(z + h) - 2.0 * f0 + f(z - h)) / h**2
    s2 = (f(z + h / 2) - 2.0 * f0 + f(z - h / 2)) / (h / 2) ** 2
    return (4.0 * s2 - s1) / 3.0


def find_equilibrium(cfg, bracket=None, include_cp=True, include_dcp=True,
                     rel_tol=1e-11, xtol=1e-16) -> TrapSummary:
    """Root of ∂z U_total near the first antinode, plus the trap frequencies.

    Parameters
    ----------
    bracket : (float, float), optional
        Search interval in m; default (0.1, 0.9)·λ0/2.
    include_cp, include_dcp : bool
        Switch the surface potentials on or off.
    rel_tol : float
        Quadrature tolerance for the CP/DCP evaluations; finite differences
        of quadrature output need more digits than the potentials themselves.
    """
    lam = cfg.drive.wavelength
    lo, hi = bracket or (0.05 * lam, 0.45 * lam)
    ucp = (lambda z: u_cp(cfg, z, rel_tol)) if include_cp else None
    udcp = (lambda z: u_dcp(cfg, z, rel_tol)) if include_dcp else None

    def force(z):
        d = du_trap(cfg, z)
        if ucp:
            d += richardson_first(ucp, z)
        if udcp:
            d += richardson_first(udcp, z)
        return d

    flo, fhi = force(lo), force(hi)
    if not flo * fhi < 0:
        raise TrapLostError(f"no sign change of dU/dz in [{lo:.4g}, {hi:.4g}] m: trap lost")
    z0 = brentq(force, lo, hi, xtol=xtol, maxiter=200)
    m = cfg.mass
    w_tr2 = trap_curvature(cfg, z0) / m
    w_cp2 = richardson_second(ucp, z0) / m if ucp else 0.0
    w_dcp2 = richardson_second(udcp, z0) / m if udcp else 0.0
    total2 = w_tr2 + w_cp2 + w_dcp2
    stable = total2 > 0
    if not stable:
        log.warning("negative total trap curvature at z0 = %.6g m: unstable", z0)
    return TrapSummary(z0, _signed_sqrt(w_tr2), _signed_sqrt(w_cp2), _signed_sqrt(w_dcp2),
                       math.sqrt(total2) if stable else math.nan, float(total2), bool(stable))
