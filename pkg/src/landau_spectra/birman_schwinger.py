"""Galerkin realization of the sandwiched resolvent and its determinant.

The operator ``T(k) = J |W|^{1/2} (H0 - z)^{-1} |W|^{1/2}`` at ``z = Lambda_q + k**2``
is discretized on a product space

    (retained Landau levels j, angular momentum m)  x  (Hermite functions h_n in x3)

Every transverse profile here is radial, so ``T`` splits into independent
blocks, one per angular momentum ``m``.  Inside a block::

    T_m(k) = eps * e^{i alpha} * sum_j (R e_j)(R e_j)^T  (x)  N_j(k)

where ``R`` is the square root of the matrix of ``F`` between the retained
levels and ``N_j`` is the x3 resolvent sandwiched by ``G^{1/2}`` at the
shifted spectral parameter ``Lambda_q + k**2 - Lambda_j``.

The x3 integrals use the correlation trick: with ``g_a = G^{1/2} h_a``::

    N_ab = int_0^inf K(u) C_ab(u) du,   C_ab(u) = int g_a(x) (g_b(x-u) + g_b(x+u)) dx

``C`` does not depend on ``k`` and is tabulated once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import block_diag
from scipy.special import roots_legendre

from ._radial import radial_elements, t_cut_for
from ._validation import check_nonnegative_int, check_positive, check_positive_int, check_square
from .landau_core import KPoint, decaying_root, hermite_matrix
from .potentials import SeparablePotential

__all__ = [
    "GalerkinBasis",
    "BSOperator",
    "BSEngine",
    "TruncationError",
    "resolvent_kernel",
    "s_kernel",
    "resolvent_1d_block",
    "transverse_block",
    "transverse_factor",
    "assemble_T",
    "split_singular",
    "kkstar_check",
    "det_p",
    "schatten_norm",
    "lipschitz_gamma",
    "calibrate_gamma",
    "default_hermite_scale",
    "GAMMA_P",
]


class TruncationError(RuntimeError):
    """A truncation is too coarse for the requested accuracy."""


@dataclass(frozen=True)
class GalerkinBasis:
    """Truncations of the Galerkin space.

    ``levels`` are the retained Landau indices, ``m_max`` the largest
    angular momentum, ``n_max`` the number of Hermite functions along the
    field and ``hermite_scale`` their length scale.
    """

    q_center: int
    levels: tuple
    m_max: int
    n_max: int
    hermite_scale: float = 1.0

    def __post_init__(self):
        check_nonnegative_int(self.q_center, "q_center")
        object.__setattr__(self, "levels", tuple(sorted(int(j) for j in self.levels)))
        if self.q_center not in self.levels:
            raise ValueError(f"q_center={self.q_center} must be one of the retained levels {self.levels}")
        if any(j < 0 for j in self.levels):
            raise ValueError("Landau indices are non-negative")
        check_nonnegative_int(self.m_max, "m_max")
        check_positive_int(self.n_max, "n_max")
        check_positive(self.hermite_scale, "hermite_scale")

    @classmethod
    def around(cls, q, J, m_max, n_max, hermite_scale=1.0):
        """Levels ``q - J .. q + J`` (clipped at 0)."""
        check_nonnegative_int(J, "J")
        levels = tuple(j for j in range(q - J, q + J + 1) if j >= 0)
        return cls(q, levels, m_max, n_max, hermite_scale)

    @property
    def angular_momenta(self):
        return tuple(range(-self.q_center, self.m_max + 1))

    def levels_for(self, m):
        """Retained levels that carry angular momentum ``m``."""
        return tuple(j for j in self.levels if j >= -m)

    @property
    def dim(self):
        return sum(len(self.levels_for(m)) for m in self.angular_momenta) * self.n_max

    def to_dict(self):
        return {
            "q_center": self.q_center,
            "levels": list(self.levels),
            "m_max": self.m_max,
            "n_max": self.n_max,
            "hermite_scale": self.hermite_scale,
        }


def default_hermite_scale(G):
    """Hermite scale matched to ``G``: ``h_0`` is then ``G^{1/2}`` up to a constant for gaussians."""
    if G.family == "gaussian":
        return 1.0 / math.sqrt(G.mu)
    return 1.0


# ---------------------------------------------------------------------------
# one-dimensional kernels


def resolvent_kernel(lam, u, boundary=False):
    """Kernel of ``(D^2 - lam)^{-1}`` at separation ``u``.

    For ``lam`` off ``[0, inf)`` this is ``i exp(i kappa |u|) / (2 kappa)`` with
    ``Im kappa > 0``.  On ``(0, inf)`` the boundary value from the upper half
    plane is returned only if ``boundary=True``.
    """
    lam = complex(lam)
    if lam.imag == 0 and lam.real >= 0 and not boundary:
        raise ValueError(f"lam={lam} lies on [0, inf); pass boundary=True for the boundary value")
    if lam == 0:
        raise ValueError("the one-dimensional resolvent kernel is singular at lam = 0")
    kappa = complex(decaying_root(lam))
    if lam.imag == 0 and lam.real > 0:
        kappa = math.sqrt(lam.real)
    u = np.abs(np.asarray(u, dtype=float))
    return 1j * np.exp(1j * kappa * u) / (2 * kappa)


def s_kernel(kappa, u):
    """Regular part ``(1 - exp(i kappa u)) / (2 i kappa)``; ``-u/2`` at ``kappa = 0``."""
    u = np.abs(np.asarray(u, dtype=float))
    kappa = complex(kappa)
    if kappa == 0:
        return -0.5 * u + 0j
    return -np.expm1(1j * kappa * u) / (2j * kappa)


def _gl(a, b, panels, order):
    x, w = roots_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


@dataclass(frozen=True)
class _Correlation:
    u: np.ndarray  # nodes on [0, 2X]
    w: np.ndarray
    C: np.ndarray  # (n_u, n, n)
    c: np.ndarray  # int g_a
    error: float


def _x_extent(G, n_max, scale):
    herm = scale * (math.sqrt(2 * n_max + 1) + 9.0)
    if G.family == "gaussian":
        # G^{1/2} below 1e-18 of its peak
        return min(herm, math.sqrt(2 * 18 * math.log(10) / G.mu))
    return herm


def _tabulate_correlation(G, n_max, scale, panels=24, order=24):
    X = _x_extent(G, n_max, scale)

    def table(px, pu):
        x, wx = _gl(-X, X, px, order)
        u, wu = _gl(0.0, 2 * X, pu, order)
        gx = hermite_matrix(n_max, x, scale) * G.sqrt(x)  # (n, nx)
        # g_b(x -+ u) for every (x, u) pair
        xm = x[None, :] - u[:, None]
        xp = x[None, :] + u[:, None]
        gm = hermite_matrix(n_max, xm, scale) * G.sqrt(xm)  # (n, nu, nx)
        gp = hermite_matrix(n_max, xp, scale) * G.sqrt(xp)
        shifted = gm + gp
        C = np.einsum("ax,bux->uab", gx * wx, shifted, optimize=True)
        c = gx @ wx
        return u, wu, C, c

    u, wu, C, c = table(panels, panels)
    # self check: int_0^inf C du equals c c^T; compare with a doubled x rule
    _, _, _, c2 = table(2 * panels, panels)
    cc = np.outer(c, c)
    err_u = np.max(np.abs(np.tensordot(wu, C, axes=1) - cc)) / max(np.max(np.abs(cc)), 1e-300)
    err_x = np.max(np.abs(c2 - c)) / max(np.max(np.abs(c)), 1e-300)
    C = 0.5 * (C + np.transpose(C, (0, 2, 1)))
    return _Correlation(u, wu, C, c, float(max(err_u, err_x)))


def resolvent_1d_block(z_shift, basis, G, boundary=False):
    """``<G^{1/2} h_a, (D^2 - z_shift)^{-1} G^{1/2} h_b>`` for ``a, b < n_max``.

    Complex symmetric.  ``z_shift`` on ``[0, inf)`` requires ``boundary=True``.
    """
    z_shift = complex(z_shift)
    if z_shift.imag == 0 and z_shift.real >= 0 and not boundary:
        raise ValueError(f"z_shift={z_shift} lies on [0, inf); pass boundary=True for the boundary value")
    corr = _correlation(G, basis.n_max, basis.hermite_scale)
    if z_shift.imag == 0 and z_shift.real > 0:
        kappa = complex(math.sqrt(z_shift.real))
    else:
        kappa = complex(decaying_root(z_shift))
    return _apply_kernel(corr, kappa)


@lru_cache(maxsize=32)
def _correlation(G, n_max, scale):
    corr = _tabulate_correlation(G, n_max, scale)
    if corr.error > 1e-9:
        corr = _tabulate_correlation(G, n_max, scale, panels=48, order=32)
        if corr.error > 1e-9:
            raise TruncationError(f"x3 quadrature self check failed ({corr.error:.2e}); reduce n_max or adjust hermite_scale")
    return corr


def _contract(corr, weights):
    # C is real: two real GEMVs avoid promoting the table to complex
    flat = corr.C.reshape(len(corr.u), -1)
    n = corr.C.shape[1]
    return (weights.real @ flat + 1j * (weights.imag @ flat)).reshape(n, n)


def _apply_kernel(corr, kappa):
    ker = 1j * np.exp(1j * kappa * corr.u) / (2 * kappa)
    return _contract(corr, corr.w * ker)


def _apply_s(corr, kappa):
    return _contract(corr, corr.w * s_kernel(kappa, corr.u))


# ---------------------------------------------------------------------------
# transverse side


@lru_cache(maxsize=256)
def _f_matrix(F, b, levels, m):
    """Matrix of ``F`` between ``phi_{j,m}`` for ``j`` in ``levels``."""
    pairs = [(j1, j2, m) for j1 in levels for j2 in levels]
    vals, ok = radial_elements(b, pairs, F.log_value, t_cut=t_cut_for(F, b))
    if not np.all(ok):
        raise TruncationError(f"transverse quadrature did not converge at m={m}")
    M = vals.reshape(len(levels), len(levels))
    return 0.5 * (M + M.T)


def _psd_sqrt(M):
    w, V = np.linalg.eigh(M)
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def transverse_factor(F, b, basis, m):
    """``(levels, R)`` with ``R`` the square root of the level matrix of ``F`` at angular momentum ``m``."""
    levels = basis.levels_for(m)
    return levels, _psd_sqrt(_f_matrix(F, b, levels, m))


def transverse_block(j, q, b, F, basis):
    """Matrix ``<F^{1/2} phi_{q,m}, P_j F^{1/2} phi_{q,m'}>`` on ``m = -q .. m_max``.

    Diagonal because ``F`` is radial.  ``F^{1/2}`` is realized on the retained
    levels, so summing over ``j`` in ``basis.levels`` reproduces the Toeplitz
    matrix of ``F`` on level ``q``.
    """
    if j not in basis.levels:
        raise ValueError(f"level {j} is not retained by the basis")
    diag = []
    for m in range(-q, basis.m_max + 1):
        levels, R = transverse_factor(F, b, basis, m)
        if j not in levels:
            diag.append(0.0)
            continue
        iq, ij = levels.index(q), levels.index(j)
        diag.append(R[iq, ij] ** 2)
    return np.diag(diag)


# ---------------------------------------------------------------------------
# assembly


@dataclass
class BSOperator:
    """Sandwiched resolvent at one ``k``, stored by angular-momentum blocks."""

    k: KPoint
    z: complex
    alpha: float
    blocks: dict
    Bq_blocks: dict
    Aq_blocks: dict
    tail_bound: float = 0.0

    @property
    def T(self):
        return block_diag(*[self.blocks[m] for m in sorted(self.blocks)])

    @property
    def Bq(self):
        return block_diag(*[self.Bq_blocks[m] for m in sorted(self.Bq_blocks)])

    @property
    def Aq_of_k(self):
        return block_diag(*[self.Aq_blocks[m] for m in sorted(self.Aq_blocks)])

    @property
    def singular_coefficient(self):
        """``+-i e^{i alpha} / k``."""
        return self.k.branch * 1j * np.exp(1j * self.alpha) / self.k.k


class BSEngine:
    """Precomputed pieces of ``T(k)`` for one potential and basis.

    Build once, then evaluate blocks at many ``k``.  Instances are read-only
    after construction and may be shared between threads.
    """

    def __init__(self, pot: SeparablePotential, basis: GalerkinBasis, b: float):
        check_positive(b, "b")
        self.pot, self.basis, self.b = pot, basis, float(b)
        self.q = basis.q_center
        self.corr = _correlation(pot.G, basis.n_max, basis.hermite_scale)
        self.c = self.corr.c
        self.cc = np.outer(self.c, self.c)
        self.coupling = pot.epsilon * np.exp(1j * pot.alpha)
        self._cache = {}
        self._outers = {}
        self._bq = {}
        self.factors = {}
        for m in basis.angular_momenta:
            levels, R = transverse_factor(pot.F, self.b, basis, m)
            self.factors[m] = (levels, R)

    @property
    def angular_momenta(self):
        return self.basis.angular_momenta

    def _kappa(self, j, kp):
        if j == self.q:
            return kp.branch * kp.k
        return complex(decaying_root(2 * self.b * (self.q - j) + kp.k**2))

    def longitudinal(self, kp):
        """``{j: N_j(k)}`` with the level-``q`` entry replaced by its regular part."""
        key = (kp.k, kp.branch)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        out = {}
        for j in self.basis.levels:
            kappa = self._kappa(j, kp)
            out[j] = _apply_s(self.corr, kappa) if j == self.q else _apply_kernel(self.corr, kappa)
        if len(self._cache) > 50000:
            self._cache.clear()
        self._cache[key] = out
        return out

    def Bq_block(self, m):
        hit = self._bq.get(m)
        if hit is None:
            levels, R = self.factors[m]
            r = R[:, levels.index(self.q)]
            hit = 0.5 * self.pot.epsilon * np.kron(np.outer(r, r), self.cc)
            self._bq[m] = hit
        return hit

    def block(self, m, kp, N=None, split=False):
        """``T_m(k)``; with ``split=True`` returns ``(T_m, Bq_m, Aq_m)``."""
        if N is None:
            N = self.longitudinal(kp)
        levels, RR = self._outer(m)
        stack = np.stack([N[j] for j in levels])
        L, n = len(levels), self.basis.n_max
        # sum_i (r_i r_i^T) (x) N_i, laid out as (a, x, b, y)
        A = np.tensordot(RR, stack, axes=(0, 0)).transpose(0, 2, 1, 3).reshape(L * n, L * n)
        A = self.coupling * A
        B = self.Bq_block(m)
        coef = kp.branch * 1j * np.exp(1j * self.pot.alpha) / kp.k
        T = coef * B + A
        return (T, B, A) if split else T

    def _outer(self, m):
        hit = self._outers.get(m)
        if hit is None:
            levels, R = self.factors[m]
            hit = (levels, np.einsum("ai,bi->iab", R, R))
            self._outers[m] = hit
        return hit

    def tail_bound(self, kp, extra=1):
        """Frobenius size of the first ``extra`` dropped levels above the truncation."""
        top = max(self.basis.levels)
        total = 0.0
        for j in range(top + 1, top + 1 + extra):
            Nj = _apply_kernel(self.corr, self._kappa(j, kp))
            total += (self.pot.epsilon * self.pot.F.sup * np.linalg.norm(Nj)) ** 2
        return math.sqrt(total)


@lru_cache(maxsize=16)
def _engine(pot, basis, b):
    return BSEngine(pot, basis, b)


def _as_kpoint(k):
    if isinstance(k, KPoint):
        return k
    k = complex(k)
    return KPoint(k, branch=1 if k.imag > 0 else -1)


def assemble_T(pot, basis, k, b, tail_tol=None):
    """Assemble ``T(k)`` block by block.

    ``tail_tol`` (relative to ``||T||_F``) turns the dropped-level estimate
    into a :class:`TruncationError`.
    """
    kp = _as_kpoint(k)
    eng = _engine(pot, basis, float(b))
    N = eng.longitudinal(kp)
    blocks, Bs, As = {}, {}, {}
    for m in eng.angular_momenta:
        blocks[m], Bs[m], As[m] = eng.block(m, kp, N, split=True)
    tail = eng.tail_bound(kp)
    op = BSOperator(kp, 2 * b * basis.q_center + kp.k**2, pot.alpha, blocks, Bs, As, tail)
    if tail_tol is not None:
        norm = math.sqrt(sum(np.linalg.norm(t) ** 2 for t in blocks.values()))
        if norm > 0 and tail > tail_tol * norm:
            raise TruncationError(
                f"dropped-level estimate {tail:.3e} exceeds {tail_tol:g} * ||T||; retain more levels (J >= {len(basis.levels)})"
            )
    return op


def split_singular(pot, basis, k, b):
    """``(Bq, Aq)`` with ``T = +-(i e^{i alpha} / k) Bq + Aq``."""
    op = assemble_T(pot, basis, k, b)
    return op.Bq, op.Aq_of_k


def kkstar_check(pot, basis, b, toeplitz=None):
    """Relative Frobenius residual of ``K K^*`` against ``P_q W P_q``.

    ``K = sqrt(eps/2) (Pi_q R) (x) c^T`` is built from the Galerkin pieces and
    ``P_q W P_q`` from the Toeplitz module, whose ``x3`` integral is adaptive
    and independent of the Hermite expansion.
    """
    from .potentials import effective_W
    from .toeplitz import toeplitz_spectrum_radial

    q = basis.q_center
    if pot.epsilon == 0:
        return 0.0
    corr = _correlation(pot.G, basis.n_max, basis.hermite_scale)
    c = corr.c
    kk = []
    for m in basis.angular_momenta:
        levels, R = transverse_factor(pot.F, b, basis, m)
        Pi = np.zeros((len(levels), len(levels)))
        iq = levels.index(q)
        Pi[iq, iq] = 1.0
        K = math.sqrt(0.5 * pot.epsilon) * np.kron(Pi @ R, c[None, :])
        kk.append((K @ K.conj().T)[iq, iq])
    kk = np.array(kk)
    if toeplitz is None:
        toeplitz = toeplitz_spectrum_radial(q, b, effective_W(pot), m_max=basis.m_max)
    order = np.argsort(toeplitz.m_index)
    target = toeplitz.mu[order]
    return float(np.linalg.norm(kk - target) / np.linalg.norm(target))


# ---------------------------------------------------------------------------
# determinants


def det_p(T, p=2, method="lu"):
    """``det_{ceil p}(I - T)``.

    ``method="eig"`` multiplies ``(1 - mu) exp(sum_{k<ceil p} mu^k / k)`` over
    the eigenvalues of ``T``; ``method="lu"`` uses ``det(I - T)`` and traces of
    powers.  For ``det(I + T)`` pass ``-T``.
    """
    T = check_square(np.asarray(T, dtype=complex), "T")
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    order = math.ceil(p)
    n = T.shape[0]
    if n == 0:
        return 1.0 + 0j
    if method == "eig":
        mu = np.linalg.eigvals(T)
        log = np.sum(np.log(1 - mu + 0j))
        for j in range(1, order):
            log += np.sum(mu**j) / j
        return complex(np.exp(log))
    if method != "lu":
        raise ValueError(f"unknown method {method!r}")
    sign, logabs = np.linalg.slogdet(np.eye(n) - T)
    if sign == 0:
        return 0j
    acc = 0j
    P = np.eye(n, dtype=complex)
    for j in range(1, order):
        P = P @ T
        acc += np.trace(P) / j
    return complex(sign * np.exp(logabs + acc))


def schatten_norm(T, p=2):
    s = np.linalg.svd(np.asarray(T), compute_uv=False)
    return float(np.sum(s**p) ** (1.0 / p))


def lipschitz_gamma(T1, T2, p=2):
    """Smallest ``Gamma`` making the Lipschitz estimate hold for this pair."""
    d = abs(det_p(T1, p) - det_p(T2, p))
    dn = schatten_norm(np.asarray(T1) - np.asarray(T2), p)
    if d == 0 or dn == 0:
        return 0.0
    base = (schatten_norm(T1, p) + schatten_norm(T2, p) + 1.0) ** math.ceil(p)
    return max(0.0, math.log(d / dn) / base)


def calibrate_gamma(p=2, trials=300, dims=(2, 3, 4, 6, 8), seed=0):
    """Empirical ``Gamma_p``: the largest pairwise value over random matrix pairs."""
    rng = np.random.default_rng(seed)
    best = 0.0
    for dim in dims:
        for _ in range(trials):
            scale = rng.uniform(0.05, 2.0)
            T1 = scale * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / dim
            step = rng.uniform(1e-3, 1.0) / dim
            T2 = T1 + step * (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
            best = max(best, lipschitz_gamma(T1, T2, p))
    return best


# calibrate_gamma(p) with the defaults, doubled and rounded up.  For p = 2 the
# value sits well below the classical Hilbert-Schmidt constant 1/2.
GAMMA_P = {1: 0.26, 2: 0.18, 3: 0.08, 4: 0.04}
