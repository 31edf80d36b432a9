"""Radial matrix elements of rotation-invariant functions between Landau states.

For a radial ``f`` and two Landau functions of equal angular momentum ``ell``::

    <phi_{j1,ell}, f phi_{j2,ell}> = int_0^inf f(sqrt(2t/b)) w(t) L1(t) L2(t) dt

with ``w(t) = sqrt(n1! n2! / ((n1+ell)! (n2+ell)!)) t**ell exp(-t)``.  The
weight is handled in log space so angular momenta in the thousands are fine.
"""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln, roots_legendre

from .landau_core import laguerre

_LOG_DROP = 60.0  # integrand below exp(-60) * max is ignored
_COARSE = 600


class QuadratureError(RuntimeError):
    """A quadrature failed its doubled-node self check."""


def _n_of(j, ell_signed):
    return j if ell_signed >= 0 else j + ell_signed


def _log_weight(t, n1, n2, ell):
    pref = 0.5 * (gammaln(n1 + 1) + gammaln(n2 + 1) - gammaln(n1 + ell + 1) - gammaln(n2 + ell + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        power = np.where(ell > 0, ell * np.log(t), 0.0)
    return pref + power - t


def _gl_panels(a, b, n_panels, order):
    """Composite Gauss-Legendre nodes/weights on rows ``[a_i, b_i]``."""
    x, w = roots_legendre(order)
    edges = a[:, None] + (b - a)[:, None] * np.linspace(0.0, 1.0, n_panels + 1)[None, :]
    lo, hi = edges[:, :-1], edges[:, 1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, :, None] + half[:, :, None] * x[None, None, :]).reshape(len(a), -1)
    weights = (half[:, :, None] * w[None, None, :]).reshape(len(a), -1)
    return nodes, weights


def radial_elements(b, pairs, log_f, t_cut=np.inf, rtol=1e-11, order=24, n_panels=12):
    """Vectorized radial matrix elements.

    Parameters
    ----------
    b : float
        Field strength.
    pairs : sequence of (j1, j2, m)
        Level indices and common signed angular momentum ``m``.
    log_f : callable
        ``log f(r)``; may return ``-inf``.
    t_cut : float
        ``f`` vanishes for ``t > t_cut`` (compactly supported profiles).

    Returns
    -------
    values : ndarray
    converged : ndarray of bool
        Doubled-panel self check at relative tolerance ``rtol``, measured
        against the integral of the absolute integrand.
    """
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 3)
    j1, j2, m = pairs.T
    ell = np.abs(m)
    n1 = np.where(m >= 0, j1, j1 + m)
    n2 = np.where(m >= 0, j2, j2 + m)
    if np.any(n1 < 0) or np.any(n2 < 0):
        raise ValueError("angular momentum not available on the requested level")
    ell_c = ell[:, None].astype(float)
    n1c, n2c = n1[:, None], n2[:, None]

    def log_integrand(t):
        r = np.sqrt(2.0 * t / b)
        with np.errstate(divide="ignore", invalid="ignore"):
            lf = log_f(r)
        return _log_weight(t, n1c, n2c, ell_c) + lf

    def lag_product(t):
        out = np.empty_like(t)
        for idx in np.unique(np.stack([n1, n2], 1), axis=0):
            sel = (n1 == idx[0]) & (n2 == idx[1])
            tt = t[sel]
            al = ell_c[sel]
            out[sel] = _laguerre_rows(idx[0], tt, al) * _laguerre_rows(idx[1], tt, al)
        return out

    c = ell + n1 + n2 + 1.0
    t_hi = np.minimum(c + 40.0 * np.sqrt(c) + 80.0, t_cut)
    grid = t_hi[:, None] * np.linspace(0.0, 1.0, _COARSE)[None, :]
    lg = log_integrand(grid)
    with np.errstate(divide="ignore"):
        lg = lg + np.log(np.abs(lag_product(grid)) + 1e-300)
    top = np.max(lg, axis=1)
    keep = lg > (top[:, None] - _LOG_DROP)
    first = np.argmax(keep, axis=1)
    last = _COARSE - 1 - np.argmax(keep[:, ::-1], axis=1)
    step = t_hi / (_COARSE - 1)
    a = np.maximum(0.0, (first - 2) * step)
    bnd = np.minimum(t_hi, (last + 2) * step)
    dead = ~np.isfinite(top)

    def integrate(panels):
        nodes, weights = _gl_panels(a, bnd, panels, order)
        vals = np.exp(log_integrand(nodes)) * lag_product(nodes) * weights
        return np.sum(vals, axis=1), np.sum(np.abs(vals), axis=1)

    coarse, _ = integrate(n_panels)
    for _ in range(4):
        n_panels *= 2
        fine, mass = integrate(n_panels)
        # measured against the absolute integrand: off-diagonal elements may cancel to zero
        converged = np.abs(fine - coarse) <= rtol * mass + 1e-300
        if np.all(converged | dead):
            break
        coarse = fine
    fine[dead] = 0.0
    converged[dead] = True
    return fine, converged


def _laguerre_rows(n, t, alpha):
    """``L_n^{(alpha)}(t)`` with a per-row ``alpha`` column."""
    prev = np.ones_like(t)
    if n == 0:
        return prev
    cur = 1.0 + alpha - t
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - t) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def t_cut_for(profile, b):
    """Upper limit in ``t = b r^2 / 2`` of the support of ``profile``."""
    bp = getattr(profile, "breakpoints", ())
    return b * max(bp) ** 2 / 2 if bp else np.inf


__all__ = ["radial_elements", "t_cut_for", "QuadratureError", "laguerre"]
