"""Brute-force eigensolver for ``H = H0 + W`` on a Landau x Hermite basis.

Kept independent of the determinant route: the transverse matrix uses
generalized Gauss-Laguerre rules and the longitudinal matrix a composite
Gauss-Legendre rule, sharing only the special functions of ``landau_core``.
Radial ``F`` makes ``H`` block diagonal in angular momentum; each block is
solved separately.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, roots_genlaguerre, roots_legendre

from ._validation import check_positive
from .birman_schwinger import GalerkinBasis
from .landau_core import hermite_matrix, laguerre
from .zero_finder import EigenvalueRecord, KRegion

__all__ = [
    "DenseModel",
    "kinetic_matrix",
    "oracle_f_matrix",
    "oracle_g_matrix",
    "dense_hamiltonian",
    "dense_eigenvalues",
    "toeplitz_dense",
]


def kinetic_matrix(n_max, scale=1.0):
    """``-d^2/dx^2`` on the first ``n_max`` Hermite functions of scale ``scale``."""
    n = np.arange(n_max)
    D = np.diag((2 * n + 1) / 2.0)
    off = -np.sqrt((n[:-2] + 1) * (n[:-2] + 2)) / 2.0
    D[n[:-2], n[:-2] + 2] = off
    D[n[:-2] + 2, n[:-2]] = off
    return D / scale**2


def oracle_f_matrix(F, b, levels, m, nodes=None):
    """``<phi_{j1,m}, F phi_{j2,m}>`` by generalized Gauss-Laguerre quadrature."""
    ell = abs(m)
    ns = [j if m >= 0 else j + m for j in levels]
    nodes = nodes or max(80, 2 * max(ns) + 60)
    t, w = roots_genlaguerre(nodes, ell)
    r = np.sqrt(2 * t / b)
    f = F(r)
    rows = []
    for n in ns:
        norm = math.exp(0.5 * (gammaln(n + 1) - gammaln(n + ell + 1)))
        rows.append(norm * laguerre(n, t, ell))
    L = np.array(rows)
    M = (L * (w * f)) @ L.T
    return 0.5 * (M + M.T)


def oracle_g_matrix(G, n_max, scale, panels=64, order=32):
    """``<h_a, G h_b>`` by composite Gauss-Legendre on the Hermite envelope."""
    X = scale * (math.sqrt(2 * n_max + 1) + 10.0)
    if G.family == "gaussian":
        X = min(X, math.sqrt(40 * math.log(10) / G.mu))
    x, w = roots_legendre(order)
    edges = np.linspace(-X, X, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    xs = (mid[:, None] + half[:, None] * x).ravel()
    ws = (half[:, None] * w).ravel()
    H = hermite_matrix(n_max, xs, scale)
    M = (H * (ws * G(xs))) @ H.T
    return 0.5 * (M + M.T)


@dataclass
class DenseModel:
    """Per-angular-momentum blocks of ``H0`` and ``W``."""

    basis: GalerkinBasis
    b: float
    epsilon: float
    alpha: float
    H0_blocks: dict
    W_blocks: dict
    stability: dict = field(default_factory=dict)

    @property
    def H0_matrix(self):
        from scipy.linalg import block_diag

        return block_diag(*[self.H0_blocks[m] for m in sorted(self.H0_blocks)])

    @property
    def W_matrix(self):
        from scipy.linalg import block_diag

        return block_diag(*[self.W_blocks[m] for m in sorted(self.W_blocks)])

    def block(self, m):
        return self.H0_blocks[m] + self.W_blocks[m]


def dense_hamiltonian(pot, basis, b, m_values=None):
    """Assemble ``H0`` and ``W`` blocks; ``m_values`` restricts the angular momenta."""
    check_positive(b, "b")
    if basis.n_max < 2:
        raise ValueError("the dense oracle needs n_max >= 2")
    D = kinetic_matrix(basis.n_max, basis.hermite_scale)
    Gm = oracle_g_matrix(pot.G, basis.n_max, basis.hermite_scale)
    coupling = pot.epsilon * complex(math.cos(pot.alpha), math.sin(pot.alpha))
    H0, W = {}, {}
    for m in m_values if m_values is not None else basis.angular_momenta:
        levels = basis.levels_for(m)
        Fm = oracle_f_matrix(pot.F, b, levels, m)
        lam = np.diag([2.0 * b * j for j in levels])
        n = basis.n_max
        H0[m] = np.kron(lam, np.eye(n)) + np.kron(np.eye(len(levels)), D)
        W[m] = coupling * np.kron(Fm, Gm)
    return DenseModel(basis, float(b), pot.epsilon, pot.alpha, H0, W)


def _enlarged(basis, factor):
    n = int(math.ceil(basis.n_max * factor))
    return GalerkinBasis(basis.q_center, basis.levels, basis.m_max, n, basis.hermite_scale * math.sqrt(factor))


def _in_window(z, lam_q, window):
    d = z - lam_q
    if isinstance(window, KRegion):
        k = np.sqrt(d.astype(complex))
        k = np.where(window.branch * k.imag < 0, -k, k)
        return np.array([window.contains(v) for v in k], dtype=bool)
    lo, hi = window.get("radius", (0.0, math.inf))
    ok = (np.abs(d) > lo) & (np.abs(d) < hi)
    side = window.get("side", 0)
    if side:
        ok &= side * d.imag > 0
    kmin = window.get("im_k_min", 0.0)
    if kmin:
        k = np.sqrt(d.astype(complex))
        k = np.where(k.imag < 0, -k, k)
        ok &= np.abs(k.imag) > kmin
    return ok


def dense_eigenvalues(model, window=None, pot=None, enlarge=1.5, drift_tol=1e-3):
    """Eigenvalues of each block inside ``window``, tagged by stability.

    ``window`` keys: ``radius=(lo, hi)`` bounds ``|z - Lambda_q|``, ``side=+-1``
    selects the half plane, ``im_k_min`` applies the exclusion margin.  With
    ``pot`` given, every block is re-solved on a basis enlarged by ``enlarge``
    and an eigenvalue is stable when its nearest partner moves by less than
    ``drift_tol * |z - Lambda_q|``.
    """
    window = {} if window is None else window
    lam_q = 2.0 * model.b * model.basis.q_center
    big = dense_hamiltonian(pot, _enlarged(model.basis, enlarge), model.b, list(model.H0_blocks)) if pot is not None else None
    records = []
    for m in sorted(model.H0_blocks):
        z = np.linalg.eigvals(model.block(m))
        z = z[_in_window(z, lam_q, window)]
        if len(z) == 0:
            continue
        if big is not None:
            zb = np.linalg.eigvals(big.block(m))
        for zi in sorted(z, key=lambda v: (round(v.real, 12), v.imag)):
            if big is not None:
                drift = float(np.min(np.abs(zb - zi)) / abs(zi - lam_q))
                stable = drift < drift_tol
            else:
                drift, stable = float("nan"), False
            k = np.sqrt(complex(zi - lam_q))
            if k.imag < 0 or (k.imag == 0 and k.real < 0):
                k = -k
            records.append(
                EigenvalueRecord(z=complex(zi), k=complex(k), multiplicity=1, method="oracle", residual=drift, stable=stable, m=m)
            )
        model.stability[m] = [r.stable for r in records if r.m == m]
    return records


def toeplitz_dense(F, b, q, m_max, prefactor=1.0):
    """Eigenvalues of the level-``q`` Toeplitz operator from the oracle's own matrix elements."""
    vals = []
    for m in range(-q, m_max + 1):
        vals.append(prefactor * oracle_f_matrix(F, b, (q,), m)[0, 0])
    return np.sort(np.array(vals))[::-1]
