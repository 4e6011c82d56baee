"""Adaptive Gauss-Legendre quadrature for vector-valued, complex integrands.

Integrands are called with a 1-D array of nodes and must return an array of
shape ``(n,)`` or ``(n, m)`` (m components integrated together). Tolerances
are applied per component. Interval end points and declared split points are
never evaluated, since all rules are open.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

_LO_N, _HI_N = 10, 20
_X_LO, _W_LO = np.polynomial.legendre.leggauss(_LO_N)
_X_HI, _W_HI = np.polynomial.legendre.leggauss(_HI_N)
_X_PAIR = np.concatenate([_X_LO, _X_HI])
_PTS = _LO_N + _HI_N

# relative floor (w.r.t. the integral of |f|) below which cancellation noise
# is accepted instead of refining forever
_ROUNDOFF = 1e-14


@dataclass(frozen=True)
class QuadSpec:
    """Tolerance contract for the integrators.

    ``tail_scale`` sets the length of the first segment on semi-infinite
    domains (and the first panel of ``integrate_matsubara_like``).
    """

    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_evaluations: int = 200_000
    split_points: tuple = field(default_factory=tuple)
    tail_scale: float | None = None

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be >= 0")
        if self.max_evaluations < 100:
            raise ValueError("max_evaluations must be >= 100")
        object.__setattr__(self, "split_points", tuple(sorted(float(s) for s in self.split_points)))


@dataclass(frozen=True)
class QuadResult:
    value: object
    abs_error_estimate: object
    evaluations: int


class QuadratureError(RuntimeError):
    """Tolerance not reached; carries the partial result."""

    def __init__(self, message, partial: QuadResult):
        super().__init__(message)
        self.partial = partial


def _as_2d(y, n):
    y = np.asarray(y)
    if y.ndim == 1:
        return y.reshape(n, 1), True
    return y.reshape(n, -1), False


class _Counter:
    def __init__(self, limit):
        self.n = 0
        self.limit = limit


def _panels(f, edges, counter):
    """Evaluate the 10/20-point pair on every panel given by consecutive edges."""
    a = np.asarray(edges[:-1], dtype=float)
    b = np.asarray(edges[1:], dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = (mid[:, None] + half[:, None] * _X_PAIR[None, :]).ravel()
    y, scalar = _as_2d(f(x), x.size)
    counter.n += x.size
    y = y.reshape(a.size, _PTS, -1)
    lo = np.einsum("k,pkm->pm", _W_LO, y[:, :_LO_N]) * half[:, None]
    hi = np.einsum("k,pkm->pm", _W_HI, y[:, _LO_N:]) * half[:, None]
    l1 = np.einsum("k,pkm->pm", _W_HI, np.abs(y[:, _LO_N:])) * half[:, None]
    return hi, np.abs(hi - lo), l1, scalar


def _finite(f, a, b, breaks, rel_tol, abs_tol, counter):
    """Globally adaptive bisection on [a, b]; returns (value, err, l1, scalar, ok)."""
    edges = [a] + [s for s in breaks if a < s < b] + [b]
    vals, errs, l1s, scalar = _panels(f, edges, counter)
    total = vals.sum(axis=0)
    total_err = errs.sum(axis=0)
    total_l1 = l1s.sum(axis=0)

    def tol():
        return np.maximum(np.maximum(abs_tol, rel_tol * np.abs(total)), _ROUNDOFF * total_l1)

    heap = []
    for i in range(len(edges) - 1):
        heap.append((-float(np.max(errs[i] / np.maximum(tol(), 1e-300))), edges[i], edges[i + 1],
                     vals[i], errs[i], l1s[i]))
    heapq.heapify(heap)
    while np.any(total_err > tol()):
        if counter.n + 2 * _PTS > counter.limit or not heap:
            return total, total_err, total_l1, scalar, False
        _, pa, pb, pv, pe, pl = heapq.heappop(heap)
        pm = 0.5 * (pa + pb)
        if not (pa < pm < pb):  # interval exhausted at float resolution
            return total, total_err, total_l1, scalar, False
        cv, ce, cl, _ = _panels(f, [pa, pm, pb], counter)
        total = total - pv + cv.sum(axis=0)
        total_err = total_err - pe + ce.sum(axis=0)
        total_l1 = total_l1 - pl + cl.sum(axis=0)
        t = np.maximum(tol(), 1e-300)
        for j, (ca, cb) in enumerate(((pa, pm), (pm, pb))):
            heapq.heappush(heap, (-float(np.max(ce[j] / t)), ca, cb, cv[j], ce[j], cl[j]))
    return total, total_err, total_l1, scalar, True


def _pack(value, err, scalar):
    if scalar:
        return value[0], float(err[0])
    return value, err


def integrate_adaptive(f, a: float, b: float, spec: QuadSpec = QuadSpec()) -> QuadResult:
    """Integrate ``f`` over [a, b]; ``b`` may be ``np.inf``.

    Semi-infinite domains are covered by segments of doubling length starting
    with ``spec.tail_scale`` (default 1). Integration stops once two
    consecutive segments each contribute less than ``rel_tol`` of the running
    total in every component.

    Raises
    ------
    QuadratureError
        If the tolerance is not met within ``spec.max_evaluations``.
    """
    counter = _Counter(spec.max_evaluations)
    if math.isfinite(b):
        v, e, _, scalar, ok = _finite(f, a, b, spec.split_points, spec.rel_tol, spec.abs_tol, counter)
        val, err = _pack(v, e, scalar)
        res = QuadResult(val, err, counter.n)
        if not ok:
            raise QuadratureError(f"adaptive quadrature did not converge on [{a}, {b}]", res)
        return res

    length = spec.tail_scale or 1.0
    lo = a
    total = None
    total_err = None
    small = 0
    scalar = True
    while True:
        hi = lo + length
        # later segments are judged against the running total
        seg_abs = spec.abs_tol
        if total is not None:
            nz = np.abs(total)[np.abs(total) > 0]
            if nz.size:
                seg_abs = max(spec.abs_tol, 0.25 * spec.rel_tol * float(nz.min()))
        v, e, _, scalar, ok = _finite(f, lo, hi, spec.split_points, spec.rel_tol, seg_abs, counter)
        if total is None:
            total, total_err = v, e
        else:
            total = total + v
            total_err = total_err + e
        if not ok:
            val, err = _pack(total, total_err, scalar)
            raise QuadratureError("semi-infinite quadrature did not converge", QuadResult(val, err, counter.n))
        negligible = np.all(np.abs(v) <= np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total)))
        small = small + 1 if negligible else 0
        if small >= 2:
            break
        if counter.n + 2 * _PTS > spec.max_evaluations:
            val, err = _pack(total, total_err, scalar)
            raise QuadratureError("semi-infinite quadrature: tail did not decay", QuadResult(val, err, counter.n))
        lo = hi
        length *= 2.0
    val, err = _pack(total, total_err, scalar)
    return QuadResult(val, err, counter.n)


def integrate_matsubara_like(f, spec: QuadSpec = QuadSpec()) -> QuadResult:
    """Integrate ``f`` over [0, ∞) on geometric panels.

    Panels are [0, s], [s, 2s], [2s, 4s], ... with s = ``spec.tail_scale``
    (default 1). Once successive panel contributions fall off geometrically
    the remaining tail is summed as a geometric series, which is exact for a
    power-law decay and conservative for faster decay.
    """
    counter = _Counter(spec.max_evaluations)
    s = spec.tail_scale or 1.0
    lo, hi = 0.0, s
    total = None
    total_err = None
    prev = None
    small = 0
    while True:
        v, e, _, scalar, ok = _finite(f, lo, hi, spec.split_points, spec.rel_tol,
                                      spec.abs_tol, counter)
        if total is None:
            total, total_err = v.copy(), e.copy()
        else:
            total = total + v
            total_err = total_err + e
        if not ok:
            val, err = _pack(total, total_err, scalar)
            raise QuadratureError("imaginary-axis quadrature did not converge", QuadResult(val, err, counter.n))
        tail = np.zeros_like(total)
        if prev is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(prev != 0, v / prev, 0.0)
            ratio_ok = np.isreal(ratio) & (np.abs(ratio) < 0.75) & (np.real(ratio) >= 0)
            tail = np.where(ratio_ok, v * ratio / (1.0 - ratio), v)
            if np.all(np.abs(tail) <= np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))):
                small += 1
            else:
                small = 0
            if small >= 2:
                total = total + np.where(ratio_ok, tail, 0.0)
                total_err = total_err + np.abs(tail)
                break
        if counter.n + 2 * _PTS > spec.max_evaluations:
            val, err = _pack(total, total_err, scalar)
            raise QuadratureError("imaginary-axis quadrature: tail did not decay", QuadResult(val, err, counter.n))
        prev = v
        lo, hi = hi, 2.0 * hi
    val, err = _pack(total, total_err, scalar)
    return QuadResult(val, err, counter.n)
