"""Periodic even potential in cosine form and its velocity-coupling operator.

A potential V(x) = a_0 + sum_n a_n cos(2 n kappa x) with kappa = pi / l
couples discrete velocities v_k = k kappa + s only through shifts by whole
multiples of kappa.  The coupling acts on a velocity-indexed vector f as

    (A(x) f)_k = sum_{n>=1} a_n sin(2 n kappa x) (f_{k-n} - f_{k+n}),

with out-of-range indices contributing zero.  A(x) is skew-symmetric and
odd in x, which is what makes mirror-symmetric solutions possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FourierPotential",
    "new_potential",
    "eval_potential",
    "apply_coupling",
    "coupling_bound",
]


@dataclass(frozen=True)
class FourierPotential:
    """Truncated cosine series of a periodic even potential.

    Attributes:
        period_l: spatial period and device length (dimensionless units).
        coeffs: cosine coefficients a_0, a_1, ..., a_N; a_0 is the constant
            term and never enters the coupling operator.
        kappa: pi / period_l.
    """

    period_l: float
    coeffs: np.ndarray
    kappa: float


def new_potential(period_l: float, coeffs) -> FourierPotential:
    """Validate inputs and build a FourierPotential.

    Args:
        period_l: positive period length.
        coeffs: non-empty sequence of finite reals a_0, a_1, ...

    Returns:
        FourierPotential with kappa = pi / period_l.

    Raises:
        ValueError: on non-positive period or empty/non-finite coefficients.
    """
    if not (isinstance(period_l, (int, float)) and math.isfinite(period_l) and period_l > 0):
        raise ValueError(f"period_l must be a positive finite real, got {period_l!r}")
    arr = np.asarray(coeffs, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("coeffs must be a non-empty one-dimensional sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coeffs must all be finite")
    arr = arr.copy()
    arr.flags.writeable = False
    return FourierPotential(period_l=float(period_l), coeffs=arr, kappa=math.pi / float(period_l))


def eval_potential(p: FourierPotential, x) -> float | np.ndarray:
    """Evaluate V(x) = a_0 + sum_{n>=1} a_n cos(2 n kappa x).

    Accepts a scalar or an array of positions; returns the matching shape.
    """
    xa = np.asarray(x, dtype=float)
    n = np.arange(1, len(p.coeffs))
    if n.size == 0:
        out = np.full(xa.shape, p.coeffs[0])
    else:
        # shape (..., n) cosine table summed against a_1..a_N
        phases = 2.0 * p.kappa * np.multiply.outer(xa, n)
        out = p.coeffs[0] + np.cos(phases) @ p.coeffs[1:]
    return float(out) if np.isscalar(x) or xa.ndim == 0 else out


def _skew_shift_sum(coeffs: np.ndarray, sines, f: np.ndarray) -> np.ndarray:
    """Core convolution sum_{n>=1} a_n sines[n-1] (f down-shift - f up-shift).

    ``f`` may carry extra trailing axes (batched columns); the velocity index
    is axis 0.  ``sines`` is indexed by n-1 and may itself broadcast against
    the trailing axes of ``f``.
    """
    g = np.zeros_like(f)
    m = f.shape[0]
    for n in range(1, len(coeffs)):
        a_n = coeffs[n]
        if a_n == 0.0 or n >= m:
            continue
        w = a_n * sines[n - 1]
        # f_{k-n}: valid for k >= n; f_{k+n}: valid for k < m-n
        g[n:] += w * f[:-n]
        g[:-n] -= w * f[n:]
    return g


def apply_coupling(p: FourierPotential, x: float, f) -> np.ndarray:
    """Apply the coupling operator A(x) to a velocity-indexed vector.

    Args:
        p: the potential.
        x: position where the operator is evaluated.
        f: one-dimensional vector over a contiguous range of velocity
            indices; entries outside the range are treated as zero.

    Returns:
        Vector g with g_k = sum_{n>=1} a_n sin(2 n kappa x)(f_{k-n} - f_{k+n}).

    Raises:
        ValueError: if f is not a non-empty one-dimensional vector.
    """
    fa = np.asarray(f, dtype=float)
    if fa.ndim != 1 or fa.size == 0:
        raise ValueError("f must be a non-empty one-dimensional velocity-indexed vector")
    n = np.arange(1, len(p.coeffs))
    sines = np.sin(2.0 * p.kappa * float(x) * n)
    return _skew_shift_sum(p.coeffs, sines, fa)


def coupling_bound(p: FourierPotential) -> float:
    """Euclidean operator-norm bound C = 2 sum_{n>=1} |a_n| of A(x).

    The constant term a_0 never enters A, so a constant potential gives 0.
    """
    return 2.0 * float(np.abs(p.coeffs[1:]).sum())
