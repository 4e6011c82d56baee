"""Center-of-mass evolution under the Markovian QBM master equation

    dρ/dt = -(i/ħ)[H, ρ] - (iΓ/ħ)[z, {p, ρ}] - Λ[z, [z, ρ]],   H = p²/2M + MΩ²z²/2.

Two evolvers: closed Gaussian moment equations (exact for this quadratic
generator) and a truncated Fock-basis density matrix used as an oracle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR

log = logging.getLogger(__name__)


class StabilityError(ValueError):
    """Time step too large for the fixed-step integrator."""


class TruncationError(RuntimeError):
    """Fock-basis truncation no longer holds the state."""


@dataclass(frozen=True)
class QBMParams:
    """Mass (kg), renormalized trap frequency Ω (rad/s), Γ (1/s), Λ (Hz/m²)."""

    mass: float
    omega: float
    gamma: float = 0.0
    lam: float = 0.0

    @property
    def z_zpf(self) -> float:
        return math.sqrt(HBAR / (2.0 * self.mass * self.omega))

    @property
    def p_zpf(self) -> float:
        return HBAR / (2.0 * self.z_zpf)


def coherence_decay_rate(delta_z, lam):
    """Position-localization dephasing rate Λ·Δz² (1/s)."""
    if np.any(np.asarray(delta_z) < 0):
        raise ValueError("delta_z must be >= 0")
    return lam * np.asarray(delta_z) ** 2


@dataclass(frozen=True)
class GaussianState:
    mean_z: float
    mean_p: float
    var_zz: float
    var_zp: float
    var_pp: float

    def __post_init__(self):
        if not (self.var_zz > 0 and self.var_pp > 0):
            raise ValueError("variances must be positive")

    @property
    def health(self) -> float:
        """var_zz·var_pp - var_zp², ≥ ħ²/4 for a physical state."""
        return self.var_zz * self.var_pp - self.var_zp**2

    def as_array(self):
        return np.array([self.mean_z, self.mean_p, self.var_zz, self.var_zp, self.var_pp])

    @classmethod
    def from_array(cls, a):
        return cls(*map(float, a))

    @classmethod
    def coherent(cls, alpha, params: QBMParams):
        """Coherent state |α⟩ of the Ω-oscillator."""
        a = complex(alpha)
        return cls(2.0 * params.z_zpf * a.real, 2.0 * params.p_zpf * a.imag,
                   params.z_zpf**2, 0.0, params.p_zpf**2)


MOMENT_COLUMNS = ("mean_z", "mean_p", "var_zz", "var_zp", "var_pp")


@dataclass
class GaussianTrajectory:
    t: np.ndarray
    moments: np.ndarray  # (steps+1, 5), columns MOMENT_COLUMNS
    health: np.ndarray

    def state(self, i) -> GaussianState:
        return GaussianState.from_array(self.moments[i])


def _guard(params, dt):
    if not dt > 0:
        raise StabilityError("dt must be > 0")
    if dt * max(params.omega, params.gamma) >= 0.1:
        raise StabilityError(
            f"dt*max(Omega, Gamma) = {dt * max(params.omega, params.gamma):.3g} >= 0.1")


def moment_generator(params: QBMParams):
    """(A, b) with d/dt [⟨z⟩, ⟨p⟩, Vzz, Vzp, Vpp] = A·x + b."""
    m, w2, g = params.mass, params.omega**2, params.gamma
    a = np.array([
        [0.0, 1.0 / m, 0.0, 0.0, 0.0],
        [-m * w2, -2.0 * g, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 2.0 / m, 0.0],
        [0.0, 0.0, -m * w2, -2.0 * g, 1.0 / m],
        [0.0, 0.0, 0.0, -2.0 * m * w2, -4.0 * g],
    ])
    b = np.array([0.0, 0.0, 0.0, 0.0, 2.0 * HBAR**2 * params.lam])
    return a, b


def evolve_gaussian(state: GaussianState, params: QBMParams, dt: float, steps: int) -> GaussianTrajectory:
    """Fixed-step RK4 integration of the closed moment equations.

    For a linear autonomous system one RK4 step is the affine map
    x → P x + q with P the 4th-order Taylor polynomial of exp(hA), which
    is applied directly.
    """
    _guard(params, dt)
    a, b = moment_generator(params)
    ha = dt * a
    eye = np.eye(5)
    ha2 = ha @ ha
    ha3 = ha2 @ ha
    p = eye + ha + ha2 / 2.0 + ha3 / 6.0 + ha3 @ ha / 24.0
    q = dt * (eye + ha / 2.0 + ha2 / 6.0 + ha3 / 24.0) @ b
    x = np.empty((steps + 1, 5))
    x[0] = state.as_array()
    for i in range(steps):
        x[i + 1] = p @ x[i] + q
    health = x[:, 2] * x[:, 4] - x[:, 3] ** 2
    bad = np.nonzero(health < 0.25 * HBAR**2 * (1.0 - 1e-9))[0]
    if bad.size:
        log.warning("uncertainty bound violated from step %d (min h/(hbar^2/4) = %.6g)",
                    bad[0], health.min() / (0.25 * HBAR**2))
    return GaussianTrajectory(np.arange(steps + 1) * dt, x, health)


# -- Fock-basis oracle ---------------------------------------------------------

def _ladder(dim):
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


@dataclass(frozen=True)
class FockState:
    """Density matrix in the number basis of the Ω-oscillator."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> complex:
        return np.trace(self.matrix)

    @property
    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    @classmethod
    def from_ket(cls, psi):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def number(cls, n, dim):
        psi = np.zeros(dim)
        psi[n] = 1.0
        return cls.from_ket(psi)

    @staticmethod
    def coherent_ket(alpha, dim):
        n = np.arange(dim)
        logfact = np.array([math.lgamma(k + 1) for k in n])
        a = complex(alpha)
        mag = np.exp(-0.5 * abs(a) ** 2 + n * math.log(abs(a)) - 0.5 * logfact) if a != 0 else (n == 0) * 1.0
        return mag * np.exp(1j * n * np.angle(a))

    @classmethod
    def coherent(cls, alpha, dim):
        return cls.from_ket(cls.coherent_ket(alpha, dim))

    @classmethod
    def cat(cls, alpha, dim, sign=1.0):
        """(|α⟩ + sign·|-α⟩)/norm."""
        return cls.from_ket(cls.coherent_ket(alpha, dim) + sign * cls.coherent_ket(-alpha, dim))


@dataclass
class FockTrajectory:
    t: np.ndarray
    moments: np.ndarray  # (records, 5) in SI, columns MOMENT_COLUMNS
    trace: np.ndarray
    hermiticity: np.ndarray
    min_eigenvalue: np.ndarray
    observables: dict = field(default_factory=dict)
    final: FockState | None = None


class FockOperators:
    """Dimensionless X = a + a†, P = i(a† - a) so z = z_zpf X, p = p_zpf P."""

    def __init__(self, dim):
        a = _ladder(dim)
        self.dim = dim
        self.x = (a + a.T).astype(complex)
        self.p = 1j * (a.T - a)
        self.n = np.arange(dim, dtype=float)
        self.parity = np.diag((-1.0) ** self.n)


def fock_moments(rho, ops: FockOperators, params: QBMParams):
    ex = np.trace(ops.x @ rho).real
    ep = np.trace(ops.p @ rho).real
    xx = np.trace(ops.x @ ops.x @ rho).real
    pp = np.trace(ops.p @ ops.p @ rho).real
    xp = 0.5 * np.trace((ops.x @ ops.p + ops.p @ ops.x) @ rho).real
    zz, pz = params.z_zpf, params.p_zpf
    return np.array([zz * ex, pz * ep, zz**2 * (xx - ex**2), zz * pz * (xp - ex * ep),
                     pz**2 * (pp - ep**2)])


def evolve_fock(state: FockState, params: QBMParams, dt: float, steps: int, record_every=1,
                observables=None, guard_every=10, tail_fraction=0.1, tail_tol=1e-6) -> FockTrajectory:
    """RK4 integration of the master equation on a truncated number basis.

    Parameters
    ----------
    observables : dict of str -> (dim, dim) array, optional
        Extra operators whose expectation values are recorded.
    guard_every : int
        Steps between truncation checks (population in the top
        ``tail_fraction`` of levels must stay below ``tail_tol``) and
        positivity monitoring.

    Raises
    ------
    TruncationError
        If the state leaks into the top levels of the basis.
    """
    _guard(params, dt)
    if state.hermiticity_error > 1e-12 or abs(state.trace - 1.0) > 1e-10:
        raise ValueError("initial density matrix must be Hermitian with unit trace")
    ops = FockOperators(state.dim)
    w, g, lz = params.omega, params.gamma, params.lam * params.z_zpf**2
    h = w * (ops.n + 0.5)
    top = max(1, int(math.ceil(tail_fraction * state.dim)))

    x, p = ops.x, ops.p

    # ρ stays Hermitian, so ρX = (Xρ)† and ρP = (Pρ)†; the dissipator collapses
    # to a single commutator [X, Y] with anti-Hermitian Y, i.e. XY + (XY)†.
    def rhs(r):
        out = -1j * (h[:, None] * r - r * h[None, :])
        y = None
        if g:
            pr = p @ r
            y = -0.5j * g * (pr + pr.conj().T)
        if lz:
            xr = x @ r
            c = -lz * (xr - xr.conj().T)
            y = c if y is None else y + c
        if y is not None:
            xy = x @ y
            out = out + xy + xy.conj().T
        return out

    def check(r, i):
        tail = float(np.sum(np.diag(r).real[-top:]))
        if tail > tail_tol:
            raise TruncationError(
                f"population {tail:.3g} in top {top} Fock levels at step {i}; increase dim")

    observables = observables or {}
    rec_t, rec_m, rec_tr, rec_h, rec_e = [], [], [], [], []
    rec_o = {k: [] for k in observables}
    rho = state.matrix.copy()
    check(rho, 0)
    min_eig = np.nan
    for i in range(steps + 1):
        if i % guard_every == 0 or i == steps:
            check(rho, i)
            min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
        if i % record_every == 0 or i == steps:
            rec_t.append(i * dt)
            rec_m.append(fock_moments(rho, ops, params))
            rec_tr.append(np.trace(rho).real)
            rec_h.append(float(np.max(np.abs(rho - rho.conj().T))))
            rec_e.append(min_eig)
            for k, op in observables.items():
                rec_o[k].append(np.trace(op @ rho))
        if i == steps:
            break
        k1 = rhs(rho)
        k2 = rhs(rho + 0.5 * dt * k1)
        k3 = rhs(rho + 0.5 * dt * k2)
        k4 = rhs(rho + dt * k3)
        rho = rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    eig = np.array(rec_e)
    if np.nanmin(eig) < -1e-10:
        log.info("density matrix developed negative eigenvalue %.3g (Markovian QBM artifact)",
                 np.nanmin(eig))
    return FockTrajectory(np.array(rec_t), np.array(rec_m), np.array(rec_tr), np.array(rec_h), eig,
                          {k: np.array(v) for k, v in rec_o.items()}, FockState(rho))


def moment_scales(params: QBMParams):
    """Zero-point scales of the five moments, used to normalize comparisons."""
    zz, pz = params.z_zpf, params.p_zpf
    return np.array([zz, pz, zz**2, zz * pz, pz**2])


def compare_moments(gauss: np.ndarray, fock: np.ndarray, params: QBMParams):
    """Per-moment deviation |g - f| / max(|f|, zero-point scale)."""
    scale = np.maximum(np.abs(fock), moment_scales(params))
    return np.abs(gauss - fock) / scale
