"""Spectral density J(ω, z), QBM kernels and the coefficients Γ and Λ.

Units: J is in J/m² (= kg/s²), chosen so that Λ = πJ/(2ħ) comes out in
Hz/m² and Γ = πJ'/(2M) in 1/s.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import C, EPS0, HBAR, KB
from .greens import (MethodError, greens_free_im_diag, recoil_free, recoil_nearfield_asymptote,
                     recoil_scattering, scattering_components)
from .materials import Vacuum, coth_factor, polarizability


class SpectralMode(str, enum.Enum):
    FULL = "full"  # standing-wave field and its gradient at z
    APPROX = "approx"  # particle at an antinode, ∂zE0 = 0
    CLOSED_FORM_FREE = "closed_form_free"
    CLOSED_FORM_PC_NEARFIELD = "closed_form_pc_nearfield"
    CLOSED_FORM_METAL_NEARFIELD = "closed_form_metal_nearfield"


@dataclass(frozen=True)
class CoefficientPair:
    """Dissipation Γ (1/s) and localization Λ (Hz/m²)."""

    gamma: float
    lam: float


def _alpha_sum_sq(cfg, omega):
    s = cfg.alpha0() + polarizability(cfg.particle, omega)
    return np.abs(s) ** 2 if np.iscomplexobj(s) else s**2


def gamma0(cfg, omega):
    """Dipole-like rate [α(ω0)+α(ω)]²|E0|²ω³/(12πε0ħc³) with the peak field (1/s)."""
    return _alpha_sum_sq(cfg, omega) * cfg.e_max**2 * omega**3 / (12.0 * math.pi * EPS0 * HBAR * C**3)


def _fields(cfg, z, mode):
    if mode is SpectralMode.FULL:
        prof = cfg.field_profile
        return float(prof.amplitude(z)), float(prof.derivative(z))
    return cfg.e_max, 0.0


def g_factor(cfg, z, omega, part="scattering", mode=SpectralMode.FULL,
             recoil_method="integral", rel_tol=1e-8):
    """Field-weighted Im Green contraction (V²/m⁵).

    g = E²·Im ∂z1∂z2 G^xx + E'²·Im G^xx + 2EE'·Im ∂z1 G^xx, where E is the
    standing-wave amplitude at z and E' its z-derivative (E' = 0 and E = E_max
    in ``APPROX`` mode). For ``part="free"`` the single-derivative term
    vanishes by parity.
    """
    mode = SpectralMode(mode)
    e, ep = _fields(cfg, z, mode)
    if part == "free":
        return e**2 * recoil_free(omega) + ep**2 * greens_free_im_diag(omega).xx
    if part != "scattering":
        raise ValueError("part must be 'free' or 'scattering'")
    if isinstance(cfg.surface, Vacuum) or (e == 0 and ep == 0):
        return 0.0
    if ep == 0.0:
        return e**2 * recoil_scattering(cfg.surface, z, omega, recoil_method, rel_tol)
    s = scattering_components(cfg.surface, z, omega, rel_tol)
    return e**2 * s.recoil_xx.imag + ep**2 * s.g_xx.imag + 2.0 * e * ep * s.dz_xx.imag


def _check_mode_surface(cfg, mode):
    if mode is SpectralMode.CLOSED_FORM_PC_NEARFIELD and cfg.surface.finite:
        raise MethodError("closed_form_pc_nearfield requires a perfect-conductor surface")
    if mode is SpectralMode.CLOSED_FORM_METAL_NEARFIELD and not cfg.surface.finite:
        raise MethodError("closed_form_metal_nearfield requires a finite-permittivity surface")


def _closed_form(cfg, z, omega, mode, part):
    g0 = gamma0(cfg, omega)
    free = 2.0 * HBAR * omega**2 * g0 / (5.0 * math.pi * C**2)
    if mode is SpectralMode.CLOSED_FORM_FREE:
        return free if part != "scattering" else 0.0 * free
    if mode is SpectralMode.CLOSED_FORM_PC_NEARFIELD:
        # near a mirror the mode density doubles: scattering part equals free part
        return 2.0 * free if part == "total" else free
    eps = cfg.surface.epsilon(omega)
    im = np.imag((eps - 1.0) / (eps + 1.0))
    zt = omega * z / C
    sc = 9.0 * HBAR * omega**2 / (16.0 * math.pi * C**2 * zt**5) * im * g0
    return {"total": free + sc, "scattering": sc, "free": free}[part]


def spectral_density(cfg, z, omega, mode=SpectralMode.APPROX, part="total",
                     recoil_method="integral", rel_tol=1e-8):
    """Effective spectral density J(ω, z) in J/m².

    Parameters
    ----------
    omega : float or array
        Positive angular frequencies.
    mode : SpectralMode
        ``FULL`` and ``APPROX`` integrate the Green's tensor; the closed-form
        modes evaluate their analytic expressions (vectorized).
    part : {"total", "free", "scattering"}
    """
    mode = SpectralMode(mode)
    _check_mode_surface(cfg, mode)
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("omega must be > 0")
    if part not in ("total", "free", "scattering"):
        raise ValueError("part must be 'total', 'free' or 'scattering'")
    if mode not in (SpectralMode.FULL, SpectralMode.APPROX):
        out = _closed_form(cfg, z, w, mode, part)
        return float(out) if np.ndim(out) == 0 else out

    def one(wi):
        g = 0.0
        if part in ("total", "free"):
            g += g_factor(cfg, z, wi, "free", mode)
        if part in ("total", "scattering"):
            g += g_factor(cfg, z, wi, "scattering", mode, recoil_method, rel_tol)
        return wi**2 / (2.0 * math.pi * EPS0 * C**2) * _alpha_sum_sq(cfg, wi) * g

    if w.ndim == 0:
        return float(one(float(w)))
    return np.array([one(float(wi)) for wi in w.ravel()]).reshape(w.shape)


def _coth(cfg, omega, literal=None):
    if literal is None:
        literal = cfg.coth_convention == "literal"
    return coth_factor(omega, cfg.temperature, literal=literal)


def coefficients_sideband(cfg, z, mode=SpectralMode.APPROX, omega_trap=None, spectral=None,
                          literal_coth=None, rel_tol=1e-12) -> CoefficientPair:
    """Γ and Λ from J at the two motional sidebands ω0 ± Ω.

    Γ = (π/4MΩ)[J(ω0+Ω) - J(ω0-Ω)], Λ = (π/4ħ)[J(ω0+Ω)c(ω0+Ω) + J(ω0-Ω)c(ω0-Ω)]
    with c = coth(ħω/2kT) (or coth(ħω/kT) when ``literal_coth``).

    ``spectral`` replaces J by any callable of ω (used for stubs and checks).
    """
    w0 = cfg.omega0
    om = cfg.drive.trap_frequency if omega_trap is None else omega_trap
    if not 0 < om < w0:
        raise ValueError("need 0 < Omega < omega0 so both sidebands are positive")
    J = spectral or (lambda w: spectral_density(cfg, z, w, mode, rel_tol=rel_tol))
    jp, jm = J(w0 + om), J(w0 - om)
    gamma = math.pi / (4.0 * cfg.mass * om) * (jp - jm)
    lam = math.pi / (4.0 * HBAR) * (jp * _coth(cfg, w0 + om, literal_coth)
                                    + jm * _coth(cfg, w0 - om, literal_coth))
    return CoefficientPair(float(gamma), float(lam))


def coefficients_approx(cfg, z, mode=SpectralMode.APPROX, spectral=None, delta=1e-6,
                        rel_tol=1e-12) -> CoefficientPair:
    """Γ ≈ (π/2M)J'(ω0) and Λ ≈ (π/2ħ)J(ω0), valid for ω0 ≫ Ω and ħω0 ≫ kT.

    J' is a central difference with step ``delta``·ω0.
    """
    w0 = cfg.omega0
    if cfg.drive.trap_frequency > 1e-3 * w0:
        warnings.warn("sideband approximation needs omega0 >> Omega", stacklevel=2)
    if cfg.temperature > 0 and HBAR * w0 < 10.0 * KB * cfg.temperature:
        warnings.warn("sideband approximation needs hbar*omega0 >> kB*T", stacklevel=2)
    J = spectral or (lambda w: spectral_density(cfg, z, w, mode, rel_tol=rel_tol))
    h = delta * w0
    jprime = (J(w0 + h) - J(w0 - h)) / (2.0 * h)
    return CoefficientPair(float(math.pi / (2.0 * cfg.mass) * jprime),
                           float(math.pi / (2.0 * HBAR) * J(w0)))


def lambda_metal_nearfield(cfg, z) -> float:
    """Near-field Λ above a metal, (9k0²/32z̃⁵)·Im[(ε-1)/(ε+1)]·γ0(ω0) (Hz/m²)."""
    if not cfg.surface.finite or isinstance(cfg.surface, Vacuum):
        raise MethodError("lambda_metal_nearfield needs a finite-permittivity metal surface")
    eps = complex(cfg.surface.epsilon(cfg.omega0))
    zt = cfg.k0 * z
    return 9.0 * cfg.k0**2 / (32.0 * zt**5) * ((eps - 1.0) / (eps + 1.0)).imag * gamma0(cfg, cfg.omega0)


def lambda_free(cfg) -> float:
    """Free-space Λ = ω0²γ0(ω0)/(5c²)."""
    return cfg.omega0**2 * gamma0(cfg, cfg.omega0) / (5.0 * C**2)


def lambda_pc_nearfield(cfg) -> float:
    """Near a perfect mirror Λ doubles: 2ω0²γ0/(5c²)."""
    return 2.0 * lambda_free(cfg)


def nearfield_identity_residual(cfg, z) -> float:
    """Relative mismatch of Λ_met·(4z²/3) against the near-field scattering rate."""
    from .potentials import gamma_scatter

    lhs = lambda_metal_nearfield(cfg, z) * 4.0 * z**2 / 3.0
    rhs = gamma_scatter(cfg, z, "nearfield")
    return abs(lhs - rhs) / abs(rhs)


# -- kernels -----------------------------------------------------------------

def _psi(t):
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(x):
    """C∞ step: 0 for x ≤ 0, 1 for x ≥ 1."""
    x = np.asarray(x, dtype=float)
    a, b = _psi(x), _psi(1.0 - x)
    return a / (a + b)


def spectral_taper(omega, w_start, w_stop):
    """C∞ factor equal to 1 below ``w_start`` and 0 above ``w_stop``."""
    return 1.0 - smooth_step((np.asarray(omega) - w_start) / (w_stop - w_start))


def _gl_grid(a, b, n_panels, order=8):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _trig_transform(nodes_in, values, nodes_out, fn, chunk=1024):
    """Σ_i values_i · fn(nodes_in_i · nodes_out_j), chunked over j."""
    out = np.empty(nodes_out.size)
    for s in range(0, nodes_out.size, chunk):
        blk = nodes_out[s:s + chunk]
        out[s:s + chunk] = fn(np.outer(blk, nodes_in)) @ values
    return out


@dataclass(frozen=True)
class KernelGrid:
    """Quadrature grids for the double (ω, τ) integrals."""

    omega_max: float
    tau_max: float
    omega_nodes: np.ndarray
    omega_weights: np.ndarray
    tau_nodes: np.ndarray
    tau_weights: np.ndarray


def kernel_grid(omega_max, tau_max, order=8) -> KernelGrid:
    # resolve sin(ωτ) in ω up to τ_max and in τ up to the largest frequency
    n_w = max(8, int(math.ceil(omega_max * tau_max / math.pi)))
    wn, ww = _gl_grid(0.0, omega_max, n_w, order)
    n_t = max(8, int(math.ceil(tau_max * 2.0 * omega_max / math.pi)))
    tn, tw = _gl_grid(0.0, tau_max, n_t, order)
    return KernelGrid(omega_max, tau_max, wn, ww, tn, tw)


class KernelCutoffError(RuntimeError):
    """The spectral density has not decayed by the frequency cutoff."""


def _cutoff(J, omega_start, limit=2**12, tol=1e-6):
    """Double ω_max until the upper half of [0, ω_max] holds < tol of ∫J."""
    w_max = omega_start
    for _ in range(int(math.log2(limit)) + 1):
        nodes, weights = _gl_grid(0.0, w_max, 64, 16)
        vals = np.abs(J(nodes)) * weights
        total = vals.sum()
        if total == 0 or vals[nodes > 0.5 * w_max].sum() < tol * total:
            return w_max
        w_max *= 2.0
    raise KernelCutoffError(f"spectral density still significant at omega_max = {w_max:.3e} rad/s; "
                            "regularize it (e.g. with spectral_taper)")


def reduced_kernels(J, temperature, tau, omega_max, grid=None, literal_coth=False):
    """S(τ) = ∫J sin(ωτ)dω and C(τ) = ∫J coth cos(ωτ)dω over [0, ω_max].

    ``J`` must accept an array of frequencies.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    g = grid or kernel_grid(omega_max, max(float(np.max(np.abs(tau))), 1.0 / omega_max))
    jw = J(g.omega_nodes) * g.omega_weights
    cth = coth_factor(g.omega_nodes, temperature, literal=literal_coth)
    s = _trig_transform(g.omega_nodes, jw, tau, np.sin)
    c = _trig_transform(g.omega_nodes, jw * cth, tau, np.cos)
    return s, c


def kernels(cfg, z, tau, mode=SpectralMode.CLOSED_FORM_FREE, spectral=None, omega_max=None):
    """Dissipation and noise kernels D(τ), N(τ).

    D = 2ħ cos(ω0τ)∫J sin(ωτ)dω, N = 2ħ cos(ω0τ)∫J cos(ωτ)coth(ħω/2kT)dω.
    The cutoff starts at 20·max(ω0, kT/ħ) and doubles until the tail is
    negligible; a physical J that keeps growing raises KernelCutoffError.
    """
    J = spectral or (lambda w: spectral_density(cfg, z, w, mode))
    if omega_max is None:
        omega_max = _cutoff(J, 20.0 * max(cfg.omega0, KB * cfg.temperature / HBAR))
    tau = np.asarray(tau, dtype=float)
    s, c = reduced_kernels(J, cfg.temperature, np.abs(tau).ravel(), omega_max,
                           literal_coth=cfg.coth_convention == "literal")
    s = np.sign(tau).ravel() * s  # S is odd in τ
    cw = np.cos(cfg.omega0 * tau.ravel())
    d, n = 2.0 * HBAR * cw * s, 2.0 * HBAR * cw * c
    return d.reshape(tau.shape), n.reshape(tau.shape)


@dataclass(frozen=True)
class KernelCheck:
    """Coefficients from time integrals of the kernels next to the sideband values."""

    from_kernels: CoefficientPair
    from_sidebands: CoefficientPair
    omega_trap: float
    tau_max: float


def regularized_spectral(J, omega0, omega_trap, stop_factor=3.0):
    """J multiplied by a C∞ taper that leaves both sidebands untouched."""
    w_start = 1.25 * (omega0 + omega_trap)
    w_stop = stop_factor * omega0
    return (lambda w: J(w) * spectral_taper(w, w_start, w_stop)), w_stop


def kernel_coefficients(cfg, z, omega_trap, spectral=None, mode=SpectralMode.CLOSED_FORM_FREE,
                        periods=1000.0) -> KernelCheck:
    """Γ and Λ from time integrals of D(τ) and N(τ).

    Γ = (1/2ħMΩ)∫D(τ)sin(Ωτ)dτ, Λ = (1/2ħ²)∫N(τ)cos(Ωτ)dτ. Regularization:
    J is tapered smoothly to zero well above the upper sideband, and the τ
    integrals run to τ_max = ``periods``/ω0 under a window that is 1 on the
    first half and rolls off smoothly (C∞) to 0. The sideband reference uses
    the same J, which is unchanged at ω0 ± Ω.
    """
    base = spectral or (lambda w: spectral_density(cfg, z, w, mode))
    J, w_max = regularized_spectral(base, cfg.omega0, omega_trap)
    tau_max = periods / cfg.omega0
    grid = kernel_grid(w_max, tau_max)
    literal = cfg.coth_convention == "literal"
    s, c = reduced_kernels(J, cfg.temperature, grid.tau_nodes, w_max, grid, literal)
    t = grid.tau_nodes
    window = 1.0 - smooth_step((t - 0.5 * tau_max) / (0.5 * tau_max))
    cw = np.cos(cfg.omega0 * t)
    d = 2.0 * HBAR * cw * s
    n = 2.0 * HBAR * cw * c
    wt = grid.tau_weights * window
    gamma = np.sum(wt * d * np.sin(omega_trap * t)) / (2.0 * HBAR * cfg.mass * omega_trap)
    lam = np.sum(wt * n * np.cos(omega_trap * t)) / (2.0 * HBAR**2)
    ref = coefficients_sideband(cfg, z, omega_trap=omega_trap, spectral=J, literal_coth=literal)
    return KernelCheck(CoefficientPair(float(gamma), float(lam)), ref, omega_trap, tau_max)


def detailed_balance_check(J, temperature, omega_samples, omega_max, tau_max, literal_coth=False):
    """Recover coth(ħω/2kT) as the ratio of the cosine transform of C to the sine transform of S.

    Returns (recovered, expected) arrays at ``omega_samples``.
    """
    grid = kernel_grid(omega_max, tau_max)
    s, c = reduced_kernels(J, temperature, grid.tau_nodes, omega_max, grid, literal_coth)
    t = grid.tau_nodes
    window = 1.0 - smooth_step((t - 0.5 * tau_max) / (0.5 * tau_max))
    ws = np.asarray(omega_samples, dtype=float)
    wt = grid.tau_weights * window
    js = _trig_transform(t, wt * s, ws, np.sin)
    jc = _trig_transform(t, wt * c, ws, np.cos)
    return jc / js, coth_factor(ws, temperature, literal=literal_coth)
