"""Electromagnetic Green's tensors of a planar half-space at coincident points.

Conventions
-----------
* κ⊥ = sqrt(k∥² - k²) with Re κ⊥ ≥ 0 for evanescent waves and
  κ⊥ = -i sqrt(k² - k∥²) for propagating ones, so e^{-κ⊥ z} is an outgoing
  wave. On the imaginary axis (ω = iξ) κ⊥ = sqrt(k∥² + ξ²/c²) is real.
* The measure dk∥ k∥/κ⊥ equals dκ⊥, so every coincident integral becomes
  ``i k ∫_0^1 du F(-iku) + (1/2z) ∫_0^∞ dv F(v/2z)``: a propagating piece in
  u = kz/k and an evanescent piece in v = 2κ⊥z, exposing the e^{-v} decay.
* Media are nonmagnetic (μ = 1).

The "recoil" tensor is the double z-derivative ∂z1∂z2 of the xx component,
which adds a weight κ⊥² to the integrand; the single derivative ∂z1 adds -κ⊥.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .constants import C
from .materials import PermittivityModel, Vacuum
from .quad import QuadSpec, integrate_adaptive

_INV8PI = 1.0 / (8.0 * math.pi)


class FresnelPair(NamedTuple):
    rp: complex
    rs: complex


@dataclass(frozen=True)
class GreensDiag:
    """Diagonal of a coincident-point Green's tensor (1/m); xx = yy by symmetry."""

    xx: complex
    yy: complex
    zz: complex

    @property
    def trace(self):
        return self.xx + self.yy + self.zz


class ScatteringComponents(NamedTuple):
    """Coincident scattering tensor pieces at one (z, ω).

    g_xx, g_zz : G_sc components (1/m)
    dz_xx : ∂z1 G_sc^xx(z1, z2) at z1 = z2 = z (1/m²)
    recoil_xx : ∂z1∂z2 G_sc^xx (1/m³)
    """

    g_xx: complex
    g_zz: complex
    dz_xx: complex
    recoil_xx: complex


class MethodError(ValueError):
    """Requested method does not apply to the given surface."""


def _k_squared(omega):
    """(ω/c)², with (iξ/c)² = -ξ²/c² kept exactly real on the imaginary axis."""
    w = np.asarray(omega, dtype=complex)
    k2 = (w / C) ** 2
    on_axis = w.real == 0.0
    k2 = np.where(on_axis, -(w.imag / C) ** 2 + 0j, k2)
    return k2[()] if k2.ndim == 0 else k2


def _is_vacuum(surface):
    return isinstance(surface, Vacuum)


def fresnel(surface: PermittivityModel, kappa_perp, omega) -> FresnelPair:
    """Fresnel coefficients rp, rs for a wave with vacuum-side κ⊥ at frequency ω.

    ``omega`` may be real or ``1j*xi``. A perfect conductor returns (1, -1).
    """
    kappa = np.asarray(kappa_perp, dtype=complex)
    if not surface.finite:
        return FresnelPair(np.ones_like(kappa), -np.ones_like(kappa))
    if _is_vacuum(surface):
        return FresnelPair(np.zeros_like(kappa), np.zeros_like(kappa))
    return _fresnel_from_eps(surface.epsilon(omega), _k_squared(omega), kappa)


def _fresnel_from_eps(eps, k2, kappa):
    if eps is None:  # perfect conductor
        return FresnelPair(np.ones_like(kappa), -np.ones_like(kappa))
    # κ1 = sqrt(κ² - (ε-1)k²) on the branch -i·sqrt((ε-1)k² - κ²)
    kappa1 = -1j * np.sqrt((eps - 1.0) * k2 - kappa**2)
    rp = (eps * kappa - kappa1) / (eps * kappa + kappa1)
    rs = (kappa - kappa1) / (kappa + kappa1)
    return FresnelPair(rp, rs)


def fresnel_nearfield(surface: PermittivityModel, kappa_perp, omega) -> FresnelPair:
    """Leading near-field expansion of the Fresnel coefficients (κ⊥ ≫ ω/c)."""
    if not surface.finite:
        raise MethodError("near-field Fresnel expansion needs a finite permittivity")
    kappa = np.asarray(kappa_perp, dtype=complex)
    eps = surface.epsilon(omega)
    ratio = _k_squared(omega) / kappa**2
    rp = (eps - 1.0) / (eps + 1.0) + eps * (eps - 1.0) / (eps + 1.0) ** 2 * ratio
    rs = 0.25 * (eps - 1.0) * ratio
    return FresnelPair(rp, rs)


def greens_free_im_diag(omega) -> GreensDiag:
    """Im of the free-space tensor at coincident points, ω/(6πc) on each axis."""
    v = omega / (6.0 * math.pi * C)
    return GreensDiag(v, v, v)


def greens_free_tensor(separation, omega) -> np.ndarray:
    """Full 3×3 free-space Green's tensor for a separation vector (m)."""
    r_vec = np.asarray(separation, dtype=float)
    r = float(np.linalg.norm(r_vec))
    if r == 0:
        raise ValueError("free-space tensor diverges at zero separation (use greens_free_im_diag)")
    k = omega / C
    kr = k * r
    n = r_vec / r
    pref = np.exp(1j * kr) / (4.0 * math.pi * k**2 * r**3)
    return pref * ((kr**2 + 1j * kr - 1.0) * np.eye(3)
                   + (3.0 - 3.0 * 1j * kr - kr**2) * np.outer(n, n))


def recoil_free(omega) -> float:
    """Free-space recoil value ω³/(15πc³) (1/m³)."""
    return omega**3 / (15.0 * math.pi * C**3)


def _components(eps, k2, kappa, damping):
    """Integrand columns [xx, zz, ∂z xx, recoil xx] in the dκ⊥ measure."""
    rp, rs = _fresnel_from_eps(eps, k2, kappa)
    kpar2 = k2 + kappa**2
    base_xx = damping * (rs + rp * kappa**2 / k2)
    base_zz = damping * rp * 2.0 * kpar2 / k2
    return np.stack([base_xx, base_zz, -kappa * base_xx, kappa**2 * base_xx], axis=-1)


def components_array(surface, z, omegas, rel_tol=1e-8, split_points=()):
    """Scattering pieces for many frequencies at once, shape (m, 4).

    ``omegas`` must be all real (> 0) or all on the imaginary axis (``1j*xi``).
    The k∥ integral is done once with one quadrature component per frequency,
    which keeps nested frequency integrals cheap.
    """
    w = np.atleast_1d(np.asarray(omegas, dtype=complex))
    m = w.size
    if _is_vacuum(surface):
        return np.zeros((m, 4), dtype=complex)
    spec = QuadSpec(rel_tol=rel_tol, max_evaluations=2_000_000)
    k2 = _k_squared(w)
    eps = surface.epsilon(w) if surface.finite else None
    imag_axis = bool(np.all(w.real == 0.0))
    if imag_axis:
        kmin = np.abs(w.imag) / C

        def f(v):
            kappa = kmin[None, :] + v[:, None] / (2.0 * z) + 0j
            damp = np.exp(-2.0 * kmin[None, :] * z - v[:, None])
            return _components(eps, k2, kappa, damp).reshape(v.size, -1)

        total = integrate_adaptive(f, 0.0, np.inf, spec).value / (2.0 * z)
    else:
        if np.any(w.imag != 0.0) or np.any(w.real <= 0.0):
            raise ValueError("frequencies must be all real and > 0, or all 1j*xi")
        k = w.real / C

        def fp(u):
            kappa = -1j * k[None, :] * u[:, None]
            damp = np.exp(2j * k[None, :] * z * u[:, None])
            return _components(eps, k2, kappa, damp).reshape(u.size, -1)

        def fe(v):
            kappa = np.broadcast_to(v[:, None] / (2.0 * z) + 0j, (v.size, m))
            damp = np.exp(-v)[:, None]
            return _components(eps, k2, kappa, damp).reshape(v.size, -1)

        prop = integrate_adaptive(fp, 0.0, 1.0, spec).value.reshape(m, 4) * (1j * k)[:, None]
        ev_spec = QuadSpec(rel_tol=rel_tol, max_evaluations=2_000_000,
                           split_points=tuple(split_points))
        ev = integrate_adaptive(fe, 0.0, np.inf, ev_spec).value.reshape(m, 4) / (2.0 * z)
        total = prop + ev
    total = np.asarray(total).reshape(m, 4) * _INV8PI
    if imag_axis:
        total = total.real + 0j
    return total


def _split_points(surface, z, omega):
    """Points in v = 2κz where the evanescent integrand changes rapidly."""
    if not surface.finite:
        return ()
    eps = complex(surface.epsilon(omega))
    k = abs(complex(omega)) / C
    pts = []
    if eps.real < -1.0:  # surface-plasmon pole
        pts.append(2.0 * z * k / math.sqrt(-eps.real - 1.0))
    elif eps.real > 1.0:  # onset of total internal reflection
        pts.append(2.0 * z * k * math.sqrt(eps.real - 1.0))
    return tuple(p for p in pts if p > 0)


@lru_cache(maxsize=8192)
def _components_cached(surface, z, omega, rel_tol):
    splits = () if isinstance(omega, complex) else _split_points(surface, z, omega)
    return tuple(complex(v) for v in components_array(surface, z, [omega], rel_tol, splits)[0])


def scattering_components(surface, z, omega, rel_tol=1e-8) -> ScatteringComponents:
    """All coincident scattering pieces (G_xx, G_zz, ∂zG_xx, recoil) at (z, ω).

    ``omega`` is real, or ``1j*xi`` for the imaginary axis (then every value is real).
    """
    if not z > 0:
        raise ValueError("z must be > 0")
    if _is_vacuum(surface):
        return ScatteringComponents(0j, 0j, 0j, 0j)
    w = complex(omega)
    if w.real == 0.0 and w.imag <= 0:
        raise ValueError("imaginary frequency must be 1j*xi with xi > 0")
    if w.imag == 0.0 and w.real <= 0:
        raise ValueError("omega must be > 0")
    vals = _components_cached(surface, float(z), w if w.imag != 0 else w.real, float(rel_tol))
    if w.real == 0.0:
        vals = tuple(complex(v.real, 0.0) for v in vals)
    return ScatteringComponents(*vals)


def greens_scattering_diag(surface, z, omega, rel_tol=1e-8) -> GreensDiag:
    """Diagonal coincident scattering Green's tensor G_sc(z, z, ω)."""
    s = scattering_components(surface, z, omega, rel_tol)
    return GreensDiag(s.g_xx, s.g_xx, s.g_zz)


def recoil_pc_closed_form(z, omega) -> float:
    """Im recoil tensor in front of a perfect conductor, closed form.

    The factored sin/cos expression cancels catastrophically for small kz, so
    a power series is used below kz = 1.
    """
    k = omega / C
    a = k * z
    if a < 1.0:
        total = 0.0
        term = 1.0  # (2a)^(2n)/(2n)! with sign
        for n in range(40):
            total += term * (1.0 / (2 * n + 3) + 1.0 / (2 * n + 5))
            term *= -(2.0 * a) ** 2 / ((2 * n + 1) * (2 * n + 2))
            if abs(term) < 1e-18:
                break
        return k**3 * total / (8.0 * math.pi)
    return k**3 / (32.0 * math.pi * a**5) * (a**2 - 1.0) * (
        6.0 * a * math.cos(2.0 * a) + (4.0 * a**2 - 3.0) * math.sin(2.0 * a))


def recoil_nearfield_asymptote(surface, z, omega) -> float:
    """Near-field recoil (3k³/(32π z̃⁵)) Im[(ε-1)/(ε+1)] for a finite-ε surface."""
    if not surface.finite:
        raise MethodError("near-field asymptote needs a finite permittivity")
    eps = complex(surface.epsilon(omega))
    k = omega / C
    return 3.0 * k**3 / (32.0 * math.pi * (k * z) ** 5) * ((eps - 1.0) / (eps + 1.0)).imag


def recoil_scattering(surface, z, omega, method="integral", rel_tol=1e-8) -> float:
    """Im of the scattering recoil tensor ∂z1∂z2 G_sc^xx (1/m³).

    Parameters
    ----------
    method : {"integral", "pc_closed_form", "nearfield_asymptote"}
    """
    if method == "integral":
        return scattering_components(surface, z, omega, rel_tol).recoil_xx.imag
    if method == "pc_closed_form":
        if surface.finite:
            raise MethodError("pc_closed_form applies only to a perfect conductor")
        return recoil_pc_closed_form(z, omega)
    if method == "nearfield_asymptote":
        return recoil_nearfield_asymptote(surface, z, omega)
    raise MethodError(f"unknown recoil method {method!r}")
