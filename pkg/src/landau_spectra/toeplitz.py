"""Toeplitz operators ``P_q U P_q`` on a Landau level.

For a radial ``U`` the operator is diagonal in angular momentum, so its
eigenvalues are the radial integrals ``<U phi_{q,m}, phi_{q,m}>``.  A dense
2-D quadrature route is kept for non-radial symbols and as a check.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from ._radial import radial_elements, t_cut_for
from ._validation import check_nonnegative_int, check_positive
from .landau_core import landau_log_radial

__all__ = [
    "ToeplitzSpectrum",
    "ClusterLadder",
    "TruncationWarning",
    "toeplitz_spectrum_radial",
    "toeplitz_matrix_general",
    "counting",
    "counting_band",
    "asymptotic_comparator",
    "cluster_radii",
    "power_constant",
]


class TruncationWarning(UserWarning):
    """A query falls below what the angular truncation resolves."""


@dataclass(frozen=True)
class ToeplitzSpectrum:
    """Descending eigenvalues of a Toeplitz operator on level ``q``.

    ``m_index`` holds the angular momentum of each eigenvalue (radial case)
    and ``floor`` the smallest value the truncation resolves; eigenvalues of
    angular momenta beyond ``m_max`` lie below it.
    """

    q: int
    b: float
    mu: np.ndarray
    m_max: int
    m_index: np.ndarray = field(default=None)
    floor: float = 0.0
    converged: bool = True

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        order = np.argsort(-mu, kind="stable")
        object.__setattr__(self, "mu", mu[order])
        if self.m_index is not None:
            object.__setattr__(self, "m_index", np.asarray(self.m_index)[order])

    def __len__(self):
        return len(self.mu)

    def scaled(self, c):
        return ToeplitzSpectrum(self.q, self.b, self.mu * c, self.m_max, self.m_index, self.floor * c, self.converged)


@dataclass(frozen=True)
class ClusterLadder:
    nu: float
    radii: np.ndarray
    gap_indices: np.ndarray
    diagnostic: str = ""

    def __len__(self):
        return len(self.radii)


def _radial_diagonal(q, b, w, ms):
    pairs = [(q, q, m) for m in ms]
    vals, ok = radial_elements(b, pairs, w.log_value, t_cut=t_cut_for(w, b))
    return vals, ok


def toeplitz_spectrum_radial(q, b, w, m_max=None, r_min=None, chunk=256, max_m=200000):
    """Spectrum of ``P_q W P_q`` for a radial effective potential ``w``.

    Either give ``m_max`` directly, or give ``r_min`` and the truncation is
    grown until every eigenvalue past it is below ``1e-3 * r_min``.
    """
    check_nonnegative_int(q, "q")
    check_positive(b, "b")
    if m_max is None:
        if r_min is None:
            raise ValueError("give m_max or r_min")
        check_positive(r_min, "r_min")
        vals, oks, ms = [], [], []
        start = -q
        while True:
            block = np.arange(start, start + chunk)
            v, ok = _radial_diagonal(q, b, w, block)
            vals.append(v)
            oks.append(ok)
            ms.append(block)
            # tail of a radial decreasing potential is monotone in m
            if np.all(v[-chunk // 4 :] < 1e-3 * r_min) and block[-1] > q:
                break
            start += chunk
            if start > max_m:
                raise RuntimeError(f"truncation did not reach 1e-3*r_min={1e-3 * r_min:g} by m={max_m}")
        vals, oks, ms = np.concatenate(vals), np.concatenate(oks), np.concatenate(ms)
        cut = np.nonzero(vals >= 1e-3 * r_min)[0]
        last = int(cut[-1]) + 1 if len(cut) else 1
        last = max(last, q + 1)
        vals, oks, ms = vals[: last + 1], oks[: last + 1], ms[: last + 1]
        m_max = int(ms[-1])
    else:
        check_nonnegative_int(m_max, "m_max")
        ms = np.arange(-q, m_max + 1)
        vals, oks = _radial_diagonal(q, b, w, ms)
    if not np.all(oks):
        warnings.warn(
            f"radial quadrature did not converge for m in {ms[~oks][:5].tolist()}...",
            RuntimeWarning,
            stacklevel=2,
        )
    floor = float(vals[-1])
    return ToeplitzSpectrum(q=q, b=b, mu=vals, m_max=int(m_max), m_index=ms, floor=floor, converged=bool(np.all(oks)))


def toeplitz_matrix_general(q, b, symbol, m_max, n_theta=None, panels=16, order=32):
    """Dense matrix ``<symbol phi_{q,m'}, phi_{q,m}>`` for ``m, m' = -q..m_max``.

    ``symbol(x1, x2)`` must be bounded; polar tensor quadrature with a
    periodic trapezoid rule in the angle.
    """
    check_nonnegative_int(q, "q")
    check_positive(b, "b")
    ms = np.arange(-q, m_max + 1)
    c = m_max + 2 * q + 1.0
    t_hi = c + 40.0 * math.sqrt(c) + 80.0
    x, wx = roots_legendre(order)
    edges = np.linspace(0.0, t_hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * wx[None, :]).ravel()
    n_theta = n_theta or 2 * (m_max + q) + 64
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    r = np.sqrt(2 * t / b)
    X1 = r[:, None] * np.cos(theta)[None, :]
    X2 = r[:, None] * np.sin(theta)[None, :]
    S = np.asarray(symbol(X1, X2), dtype=complex) * np.ones_like(X1)
    # d^2X = r dr dtheta = dt dtheta / b
    weights = (wt / b)[:, None] * (2 * np.pi / n_theta)
    phis = []
    for m in ms:
        la, lag = landau_log_radial(q, m, b, t)
        radial = np.exp(la) * lag
        phis.append(radial[:, None] * np.exp(1j * m * theta)[None, :])
    Phi = np.stack(phis).reshape(len(ms), -1)
    M = (Phi.conj() * (weights * S).ravel()[None, :]) @ Phi.T
    return 0.5 * (M + M.conj().T)


def counting(spec, r):
    """``#{j : mu_j > r}``, the trace of the spectral projector on ``(r, inf)``."""
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    if r <= spec.floor:
        warnings.warn(
            f"r={r:g} is at or below the truncation floor {spec.floor:g}; the count is a lower bound",
            TruncationWarning,
            stacklevel=2,
        )
    return int(np.count_nonzero(spec.mu > r))


def counting_band(spec, lo, hi):
    """``#{j : lo < mu_j < hi}``."""
    return int(np.count_nonzero((spec.mu > lo) & (spec.mu < hi)))


def _check_log_range(r):
    if not 0 < r < math.exp(-1):
        raise ValueError(f"r={r} outside (0, 1/e) where the logarithmic comparators are defined")


def asymptotic_comparator(regime, r, b, u0=1.0, m=None, beta=None, mu=None):
    """Leading term of the small-``r`` eigenvalue counting function.

    ``regime`` is ``"power"`` (needs ``m`` and the angular profile ``u0``,
    a constant or a callable on ``[0, 2 pi)``), ``"gaussian"`` (needs
    ``beta`` and ``mu``) or ``"compact"``.
    """
    check_positive(b, "b")
    if regime == "power":
        if not r > 0:
            raise ValueError(f"r must be positive, got {r}")
        check_positive(m, "m")
        return power_constant(b, m, u0) * r ** (-2.0 / m)
    if regime == "gaussian":
        _check_log_range(r)
        check_positive(beta, "beta")
        check_positive(mu, "mu")
        L = abs(math.log(r))
        if beta < 1:
            return 0.5 * b * mu ** (-1.0 / beta) * L ** (1.0 / beta)
        if beta == 1:
            return L / math.log(1.0 + 2.0 * mu / b)
        return beta / (beta - 1.0) * L / math.log(L)
    if regime == "compact":
        _check_log_range(r)
        L = abs(math.log(r))
        return L / math.log(L)
    raise ValueError(f"unknown regime {regime!r}")


def power_constant(b, m, u0=1.0, n=4096):
    """``(b / 4 pi) * int_{S^1} u0^{2/m}``."""
    if callable(u0):
        th = 2 * np.pi * np.arange(n) / n
        integral = float(np.mean(np.asarray(u0(th), dtype=float) ** (2.0 / m))) * 2 * np.pi
    else:
        integral = 2 * np.pi * float(u0) ** (2.0 / m)
    return b / (4 * np.pi) * integral


def cluster_radii(spec, nu=0.25):
    """Radii placed in the relative spectral gaps ``mu_j - mu_{j+1} > nu mu_j``.

    Each radius is the geometric mean of the gap's endpoints and satisfies
    ``dist(r, spectrum) >= nu r / 2``.
    """
    check_positive(nu, "nu")
    mu = np.asarray(spec.mu)
    if len(mu) < 2:
        return ClusterLadder(nu, np.array([]), np.array([], dtype=int), "fewer than two eigenvalues")
    lo, hi = mu[1:], mu[:-1]
    ok = (hi - lo > nu * hi) & (lo >= spec.floor) & (lo > 0)
    idx = np.nonzero(ok)[0]
    radii = np.sqrt(hi[idx] * lo[idx])
    keep = []
    for i, r in zip(idx, radii):
        if np.min(np.abs(mu - r)) >= nu * r / 2:
            keep.append(i)
    idx = np.asarray(keep, dtype=int)
    radii = np.sqrt(hi[idx] * lo[idx])
    diag = ""
    if len(idx) == 0:
        diag = f"no relative gap exceeds nu={nu:g}; the largest ratio is {np.max((hi - lo) / hi):.4g}, try a smaller nu"
        warnings.warn(diag, RuntimeWarning, stacklevel=2)
    return ClusterLadder(nu, radii, idx, diag)
