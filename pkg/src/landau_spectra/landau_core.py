"""Landau-level structure and the special functions it is built from.

Conventions
-----------
The magnetic potential is ``A = (-b x2 / 2, b x1 / 2, 0)`` so the shifted
Landau Hamiltonian has eigenvalues ``Lambda_q = 2 b q``.  Level ``q`` is
spanned by the functions ``phi_{q,m}`` with angular momentum ``m >= -q``::

    phi_{q,m}(X) = c * r**|m| * L_n^{(|m|)}(t) * exp(-t/2) * exp(i m theta)

with ``t = b r**2 / 2`` and ``n = q`` for ``m >= 0``, ``n = q + m`` otherwise.
The lowest level is the set of analytic functions ``zeta**m exp(-b|X|^2/4)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from ._validation import check_nonnegative_int, check_positive

__all__ = [
    "MagneticConfig",
    "KPoint",
    "BranchCutError",
    "laguerre",
    "laguerre_rodrigues",
    "projection_kernel",
    "landau_basis",
    "landau_log_radial",
    "hermite_fn",
    "hermite_matrix",
    "sqrt_branch",
    "param_z",
    "k_from_z",
]


class BranchCutError(ValueError):
    """Raised when a square root is requested on its branch cut."""


@dataclass(frozen=True)
class MagneticConfig:
    """Constant magnetic field of strength ``b`` along ``x3``."""

    b: float

    def __post_init__(self):
        check_positive(self.b, "b")

    def landau_level(self, q: int) -> float:
        check_nonnegative_int(q, "q")
        return 2.0 * self.b * q


@dataclass(frozen=True)
class KPoint:
    """Point of the local parameter ``k`` with ``z = Lambda_q + k**2``.

    ``branch`` is ``+1`` for the upper half disk (Im k > 0) and ``-1`` for
    the lower one.  ``eta`` is the radius of the half disk.
    """

    k: complex
    branch: int = 1
    eta: float = np.inf

    def __post_init__(self):
        k = complex(self.k)
        object.__setattr__(self, "k", k)
        if self.branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")
        if not k.real > 0:
            raise ValueError(f"Re(k) must be positive, got {k}")
        if not self.branch * k.imag > 0:
            raise ValueError(f"Im(k) has the wrong sign for branch {self.branch:+d}: {k}")
        if not abs(k) < self.eta:
            raise ValueError(f"|k| = {abs(k)} is not below eta = {self.eta}")


def laguerre(q, t, alpha=0):
    """Generalized Laguerre polynomial ``L_q^{(alpha)}(t)``.

    Ascending three-term recurrence; vectorized over ``t``.
    """
    check_nonnegative_int(q, "q")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("Laguerre argument must be non-negative (it is a squared distance)")
    prev = np.ones_like(t)
    if q == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - t
    for n in range(1, q):
        prev, cur = cur, ((2 * n + 1 + alpha - t) * cur - (n + alpha) * prev) / (n + 1)
    return cur if cur.ndim else float(cur)


def laguerre_rodrigues(q, t):
    """Explicit sum ``sum_k (-1)^k C(q, k) t^k / k!`` in exact rational arithmetic.

    Slow; a reference for tests.  Floating-point evaluation of this sum
    cancels catastrophically for large ``t``.
    """
    check_nonnegative_int(q, "q")
    t = np.asarray(t, dtype=float)
    coeffs = [Fraction((-1) ** k * math.comb(q, k), math.factorial(k)) for k in range(q + 1)]

    def one(x):
        x = Fraction(float(x))
        acc, p = Fraction(0), Fraction(1)
        for c in coeffs:
            acc += c * p
            p *= x
        return float(acc)

    out = np.vectorize(one, otypes=[float])(t)
    return out if out.ndim else float(out)


def projection_kernel(q, b, X, Xp):
    """Integral kernel of the projection onto the ``q``-th Landau level."""
    check_nonnegative_int(q, "q")
    check_positive(b, "b")
    X = np.asarray(X, dtype=float)
    Xp = np.asarray(Xp, dtype=float)
    x1, x2 = X[..., 0], X[..., 1]
    y1, y2 = Xp[..., 0], Xp[..., 1]
    d2 = (x1 - y1) ** 2 + (x2 - y2) ** 2
    phase = x1 * y2 - y1 * x2
    return b / (2 * np.pi) * laguerre(q, b * d2 / 2) * np.exp(-b / 4 * (d2 + 2j * phase))


def _level_indices(q, m):
    check_nonnegative_int(q, "q")
    m = int(m)
    if m < -q:
        raise ValueError(f"angular momentum m={m} is not available on level q={q} (need m >= -q)")
    ell = abs(m)
    n = q if m >= 0 else q + m
    return n, ell


def landau_log_radial(q, m, b, t):
    """``log|phi_{q,m}|`` without the Laguerre factor, and the Laguerre factor.

    Returned as ``(log_amplitude, laguerre_values)`` with
    ``|phi| = exp(log_amplitude) * |laguerre_values|``; ``t = b r^2 / 2``.
    The split keeps large angular momenta free of overflow.
    """
    n, ell = _level_indices(q, m)
    t = np.asarray(t, dtype=float)
    log_c = 0.5 * (gammaln(n + 1) - gammaln(n + ell + 1) - np.log(np.pi) + (ell + 1) * np.log(b / 2))
    # r**ell = (2 t / b)**(ell/2)
    with np.errstate(divide="ignore"):
        log_r_pow = 0.5 * ell * (np.log(2 * t / b)) if ell else np.zeros_like(t)
    return log_c + log_r_pow - t / 2, laguerre(n, t, ell)


def landau_basis(q, m, b, X):
    """Orthonormal Landau function ``phi_{q,m}`` evaluated at points ``X``."""
    check_positive(b, "b")
    X = np.asarray(X, dtype=float)
    x1, x2 = X[..., 0], X[..., 1]
    r2 = x1**2 + x2**2
    t = b * r2 / 2
    log_amp, lag = landau_log_radial(q, m, b, t)
    theta = np.arctan2(x2, x1)
    return np.exp(log_amp) * lag * np.exp(1j * m * theta)


def hermite_fn(n, x, scale=1.0):
    """L2-normalized Hermite function ``h_n(x / scale) / sqrt(scale)``."""
    return hermite_matrix(n + 1, x, scale)[n]


def hermite_matrix(n_max, x, scale=1.0):
    """Rows ``h_0 .. h_{n_max-1}`` of scaled Hermite functions at ``x``."""
    check_positive(scale, "scale")
    y = np.asarray(x, dtype=float) / scale
    out = np.empty((n_max,) + y.shape)
    out[0] = np.pi**-0.25 * np.exp(-(y**2) / 2)
    if n_max > 1:
        out[1] = np.sqrt(2.0) * y * out[0]
    for n in range(1, n_max - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * y * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out / np.sqrt(scale)


def sqrt_branch(z):
    """Square root with positive imaginary part off the real axis.

    Positive reals return the boundary value from the upper half plane
    (``sqrt(4) = 2``).  Inputs on ``(-inf, 0]`` are rejected.
    """
    z = complex(z)
    if z.imag == 0 and z.real <= 0:
        raise BranchCutError(f"sqrt_branch: argument {z} lies on the cut (-inf, 0]")
    s = np.sqrt(z)
    return -s if z.imag < 0 else s


def decaying_root(z):
    """``kappa`` with ``Im kappa >= 0`` and ``kappa**2 = z`` (vectorized).

    Continuous on the negative axis, which is where the higher Landau
    channels sit.  Used for the resolvent kernel ``i exp(i kappa |x|) / (2 kappa)``.
    """
    return 1j * np.sqrt(-np.asarray(z, dtype=complex))


def param_z(q, b, k):
    """``z = Lambda_q + k**2``."""
    kk = k.k if isinstance(k, KPoint) else complex(k)
    return 2.0 * b * q + kk * kk


def k_from_z(q, b, z, branch=1):
    """Inverse of :func:`param_z` on the half disk selected by ``branch``."""
    return branch * sqrt_branch(complex(z) - 2.0 * b * q)
