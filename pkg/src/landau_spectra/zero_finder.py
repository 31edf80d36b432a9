"""Argument-principle zero location in the ``k`` plane.

Regions are rectangles in a parameter plane ``w``.  For a plain rectangle
``k = w``; for an annular sector ``k = exp(w)`` with ``w = log|k| + i arg k``.
The map is conformal, so winding numbers and multiplicities carry over.
"""
from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive

__all__ = [
    "KRegion",
    "EigenvalueRecord",
    "ContourZeroError",
    "WindingError",
    "winding_index",
    "locate_zeros",
    "jensen_bound",
    "eigenvalues_near_level",
    "block_determinant",
    "block_winding_function",
]

_GOLDEN = (math.sqrt(5) - 1) / 2


class ContourZeroError(RuntimeError):
    """The function (nearly) vanishes on a contour; perturb the contour."""

    def __init__(self, msg, min_modulus=0.0, where=None):
        super().__init__(msg)
        self.min_modulus = min_modulus
        self.where = where


class WindingError(RuntimeError):
    """Winding numbers did not converge or are inconsistent."""


@dataclass(frozen=True)
class EigenvalueRecord:
    z: complex
    k: complex
    multiplicity: int
    method: str
    residual: float = 0.0
    stable: bool = True
    m: int | None = None

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")
        if self.method not in ("determinant", "oracle"):
            raise ValueError(f"unknown method {self.method!r}")

    def csv_row(self):
        f = lambda v: format(v, ".17g")
        return [f(self.z.real), f(self.z.imag), f(self.k.real), f(self.k.imag), str(self.multiplicity), self.method, str(self.stable).lower()]


@dataclass(frozen=True)
class KRegion:
    """Closed parameter rectangle ``[x0, x1] x [y0, y1]``.

    ``kind="rect"``: the rectangle itself in ``k``.
    ``kind="polar"``: ``|k|`` in ``[x0, x1]``, ``arg k`` in ``[y0, y1]``.
    ``branch`` is ``+1``/``-1`` for a region inside the upper/lower half disk
    of radius ``eta`` (checked, including the margin off the axes) or ``0``
    for an unconstrained region.
    """

    kind: str
    x0: float
    x1: float
    y0: float
    y1: float
    branch: int = 0
    eta: float = math.inf
    margin: float = 0.0

    def __post_init__(self):
        if self.kind not in ("rect", "polar"):
            raise ValueError("kind must be 'rect' or 'polar'")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("region must have positive area")
        if self.kind == "polar" and self.x0 <= 0:
            raise ValueError("polar regions need a positive inner radius")
        if self.branch not in (-1, 0, 1):
            raise ValueError("branch must be -1, 0 or +1")
        if self.branch:
            corners = self.boundary(64)
            if np.max(np.abs(corners)) > self.eta * (1 + 1e-12):
                raise ValueError(f"region leaves the disk of radius eta={self.eta}")
            if np.min(corners.real) < self.margin * (1 - 1e-12) or np.min(self.branch * corners.imag) < self.margin * (1 - 1e-12):
                raise ValueError("region is closer to the axes than the exclusion margin")

    @classmethod
    def rectangle(cls, x0, x1, y0, y1, branch=0, eta=math.inf, margin=0.0):
        return cls("rect", x0, x1, y0, y1, branch, eta, margin)

    @classmethod
    def half_disk(cls, eta, branch=1, margin=None, rho_min=None):
        """Annular sector filling the quarter disk ``{0 < arg(+-k) < pi/2, |k| < eta}``
        minus the exclusion margin and a small disk of radius ``rho_min``."""
        check_positive(eta, "eta")
        margin = 1e-3 * eta if margin is None else margin
        rho_min = 1e-2 * eta if rho_min is None else rho_min
        d = math.asin(min(1.0, margin / rho_min)) * (1 + 1e-9)
        if branch == 1:
            y0, y1 = d, math.pi / 2 - d
        else:
            y0, y1 = -math.pi / 2 + d, -d
        return cls("polar", rho_min, eta * (1 - 1e-12), y0, y1, branch, eta, margin)

    @property
    def param_box(self):
        if self.kind == "rect":
            return (self.x0, self.x1, self.y0, self.y1)
        return (math.log(self.x0), math.log(self.x1), self.y0, self.y1)

    def to_k(self, w):
        return w if self.kind == "rect" else np.exp(w)

    def to_w(self, k):
        return complex(k) if self.kind == "rect" else cmath.log(complex(k))

    def scale_at(self, w):
        """``|dk/dw|``."""
        return 1.0 if self.kind == "rect" else float(abs(cmath.exp(w)))

    def boundary(self, n=16):
        a, b, c, d = self.param_box
        t = np.linspace(0, 1, n, endpoint=False)
        w = np.concatenate([a + (b - a) * t + 1j * c, b + 1j * (c + (d - c) * t), b - (b - a) * t + 1j * d, a + 1j * (d - (d - c) * t)])
        return self.to_k(w)

    def contains(self, k):
        k = complex(k)
        if self.kind == "rect":
            return self.x0 <= k.real <= self.x1 and self.y0 <= k.imag <= self.y1
        r, ph = abs(k), cmath.phase(k)
        return self.x0 <= r <= self.x1 and self.y0 <= ph <= self.y1

    def to_dict(self):
        return {k: getattr(self, k) for k in ("kind", "x0", "x1", "y0", "y1", "branch", "eta", "margin")}


# ---------------------------------------------------------------------------
# winding


class _Sampler:
    """Evaluates ``f`` on parameter points with a cache and tracks edge phases."""

    def __init__(self, f, to_k, min_samples=16, max_depth=40, rel_floor=0.0):
        self.f, self.to_k = f, to_k
        self.points = {}
        self.edges = {}
        self.min_samples = min_samples
        self.max_depth = max_depth
        self.rel_floor = rel_floor
        self.evals = 0

    @staticmethod
    def _key(w):
        return (round(w.real, 14), round(w.imag, 14))

    def value(self, w):
        key = self._key(w)
        v = self.points.get(key)
        if v is None:
            v = complex(self.f(self.to_k(w)))
            self.evals += 1
            if not np.isfinite(v):
                raise ContourZeroError(f"non-finite value at k={self.to_k(w)}", 0.0, self.to_k(w))
            self.points[key] = v
        return v

    def edge_phase(self, wa, wb):
        """Continuous phase change of ``f`` from ``wa`` to ``wb`` and the minimum modulus."""
        flip = (wa.real, wa.imag) > (wb.real, wb.imag)
        a, b = (wb, wa) if flip else (wa, wb)
        key = (self._key(a), self._key(b), self.min_samples)
        hit = self.edges.get(key)
        if hit is None:
            hit = self._phase(a, b)
            self.edges[key] = hit
        dphi, mn = hit
        return (-dphi if flip else dphi), mn

    def _phase(self, a, b):
        # An interval is accepted once its phase step is below pi/2, the two
        # half steps add up to it and each chord stays shorter than the
        # smaller endpoint modulus.  The last two guard against aliasing by
        # whole turns next to clustered or multiple zeros.
        n = self.min_samples
        ts = [i / n for i in range(n + 1)]
        vals = [self.value(a + (b - a) * t) for t in ts]
        total, mn = 0.0, min(abs(v) for v in vals)
        stack = [(ts[i], ts[i + 1], vals[i], vals[i + 1], 0) for i in range(n)][::-1]
        while stack:
            t0, t1, v0, v1, depth = stack.pop()
            if v0 == 0 or v1 == 0:
                raise ContourZeroError("f vanishes on the contour", 0.0, self.to_k(a + (b - a) * (t0 if v0 == 0 else t1)))
            d = cmath.phase(v1 / v0)
            tm = 0.5 * (t0 + t1)
            vm = self.value(a + (b - a) * tm)
            mn = min(mn, abs(vm))
            if vm == 0:
                raise ContourZeroError("f vanishes on the contour", 0.0, self.to_k(a + (b - a) * tm))
            d1, d2 = cmath.phase(vm / v0), cmath.phase(v1 / vm)
            chord_ok = abs(vm - v0) < min(abs(vm), abs(v0)) and abs(v1 - vm) < min(abs(vm), abs(v1))
            if abs(d) < math.pi / 2 and abs(d1 + d2 - d) < 1e-2 and chord_ok:
                total += d1 + d2
                continue
            if depth >= self.max_depth:
                raise ContourZeroError(
                    f"phase not resolved near k={self.to_k(a + (b - a) * t0)}; a zero is on or too close to the contour",
                    min(abs(v0), abs(v1)),
                    self.to_k(a + (b - a) * t0),
                )
            stack.append((tm, t1, vm, v1, depth + 1))
            stack.append((t0, tm, v0, vm, depth + 1))
        return total, mn

    def box_winding(self, box):
        x0, x1, y0, y1 = box
        c = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
        total, mn, mx = 0.0, math.inf, 0.0
        for i in range(4):
            d, m = self.edge_phase(c[i], c[(i + 1) % 4])
            total += d
            mn = min(mn, m)
        for w in c:
            mx = max(mx, abs(self.value(w)))
        if mn == 0 or (mx > 0 and mn < self.rel_floor * mx):
            raise ContourZeroError(f"|f| drops to {mn:.3e} on the contour (max {mx:.3e})", mn)
        wnd = total / (2 * math.pi)
        n = int(round(wnd))
        if abs(wnd - n) > 1e-6:
            raise WindingError(f"non-integer winding {wnd}")
        return n


def winding_index(f, contour, samples=16):
    """Winding number of ``f`` along the closed polyline ``contour`` (list of points)."""
    pts = [complex(p) for p in contour]
    if len(pts) < 3:
        raise ValueError("a contour needs at least three vertices")
    s = _Sampler(f, lambda w: w, min_samples=samples)
    total, mn, mx = 0.0, math.inf, 0.0
    for i in range(len(pts)):
        d, m = s.edge_phase(pts[i], pts[(i + 1) % len(pts)])
        total += d
        mn = min(mn, m)
        mx = max(mx, abs(s.value(pts[i])))
    if mn == 0 or (mx > 0 and mn < s.rel_floor * mx):
        raise ContourZeroError(f"|f| drops to {mn:.3e} on the contour", mn)
    return int(round(total / (2 * math.pi)))


def _split(box, fx, fy):
    x0, x1, y0, y1 = box
    xm = x0 + fx * (x1 - x0)
    ym = y0 + fy * (y1 - y0)
    return [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]


def _muller(f, k0, h, tol, iters=60):
    """Muller iteration from ``k0 - h, k0 + h, k0``; ``None`` if it stalls."""
    x = [k0 - h, k0 + h, k0]
    y = [complex(f(v)) for v in x]
    for _ in range(iters):
        (x0, x1, x2), (y0, y1, y2) = x, y
        if y2 == 0:
            return x2
        d1, d2 = x1 - x0, x2 - x1
        if d1 == 0 or d2 == 0 or x2 == x0:
            return None
        s1, s2 = (y1 - y0) / d1, (y2 - y1) / d2
        a = (s2 - s1) / (x2 - x0)
        bb = s2 + d2 * a
        disc = cmath.sqrt(bb * bb - 4 * y2 * a)
        den = bb + disc if abs(bb + disc) >= abs(bb - disc) else bb - disc
        if den == 0:
            return None
        step = -2 * y2 / den
        x3 = x2 + step
        if not np.isfinite(x3):
            return None
        x, y = [x1, x2, x3], [y1, y2, complex(f(x3))]
        if abs(step) < 1e-3 * tol:
            return x3
    return None


def _polish(sampler, region, f, box, tol):
    """Try to pin a simple zero in ``box`` by Muller plus a tiny verifying box."""
    x0, x1, y0, y1 = box
    wc = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
    kc = complex(region.to_k(wc))
    h = 0.1 * math.hypot(x1 - x0, y1 - y0) * region.scale_at(wc)
    try:
        ks = _muller(f, kc, h, tol)
    except (ZeroDivisionError, OverflowError, ValueError, ContourZeroError):
        return None
    if ks is None:
        return None
    ws = region.to_w(ks)
    if not (x0 < ws.real < x1 and y0 < ws.imag < y1):
        return None
    half = 0.25 * tol / region.scale_at(ws)
    tiny = (ws.real - half, ws.real + half, ws.imag - half, ws.imag + half)
    try:
        if sampler.box_winding(tiny) == 1:
            return complex(ks)
    except (ContourZeroError, WindingError):
        return None
    return None


def locate_zeros(f, region, tol=1e-6, max_boxes=20000, samples=16, polish=True):
    """Zeros of ``f`` in ``region`` with multiplicities, as ``[(k, mult), ...]``.

    Recursive quadrisection on winding numbers down to boxes of diameter
    ``tol`` in ``k``.  A zero sitting on a split line is dodged by moving
    the split point along golden-ratio offsets of up to 10% of the box.
    """
    check_positive(tol, "tol")
    sampler = _Sampler(f, region.to_k, min_samples=samples)
    top = region.param_box
    n_top = sampler.box_winding(top)
    out = []
    queue = [(top, n_top)] if n_top else []
    boxes = 0
    while queue:
        box, n = queue.pop()
        x0, x1, y0, y1 = box
        centre = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
        diam = math.hypot(x1 - x0, y1 - y0) * region.scale_at(centre)
        if diam < tol:
            out.append((complex(region.to_k(centre)), n))
            continue
        if polish and n == 1:
            ks = _polish(sampler, region, f, box, tol)
            if ks is not None:
                out.append((ks, 1))
                continue
        children = None
        for attempt in range(12):
            off = 0.0 if attempt == 0 else ((attempt * _GOLDEN) % 1.0 - 0.5) * 0.2
            cand = _split(box, 0.5 + off, 0.5 - 0.7 * off)
            try:
                ws = [sampler.box_winding(c) for c in cand]
            except ContourZeroError:
                continue
            if sum(ws) != n:
                # phase aliasing on a child edge; resample more densely once
                sampler.min_samples *= 2
                ws = [sampler.box_winding(c) for c in cand]
                sampler.min_samples //= 2
                if sum(ws) != n:
                    continue
            children = list(zip(cand, ws))
            break
        if children is None:
            raise WindingError(f"could not split the box around k={region.to_k(centre)} consistently")
        boxes += 4
        if boxes > max_boxes:
            raise WindingError(f"box budget {max_boxes} exhausted")
        queue.extend((c, w) for c, w in children if w)
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


# ---------------------------------------------------------------------------
# Jensen bound


def jensen_bound(g, domain, base, subdomain, samples=256, rtol=1e-8):
    """Upper bound on the number of zeros of ``g`` in ``subdomain``.

    ``domain`` and ``subdomain`` are disks ``(centre, radius)``.  The circle
    of radius ``R'`` around ``base`` that fits in ``domain`` carries the log
    average; the disk of radius ``r'`` around ``base`` covering
    ``subdomain`` sets the constant ``1 / ln(R'/r')``.
    """
    (c0, R), (c1, r) = domain, subdomain
    base = complex(base)
    R_ = R - abs(base - complex(c0))
    r_ = abs(base - complex(c1)) + r
    if not (R_ > r_ > 0):
        raise ValueError(f"geometry hypothesis fails: need R'={R_:.4g} > r'={r_:.4g} > 0")
    g0 = complex(g(base))
    if g0 == 0:
        raise ValueError("base point is a zero of g")
    prev = None
    n = samples
    while True:
        th = 2 * np.pi * np.arange(n) / n
        vals = np.abs(np.asarray([g(base + R_ * cmath.exp(1j * t)) for t in th], dtype=complex))
        if np.min(vals) == 0 or np.min(vals) < 1e-14 * np.max(vals):
            raise ContourZeroError("g vanishes on the Jensen circle", float(np.min(vals)))
        mean = float(np.mean(np.log(vals)))
        if prev is not None and abs(mean - prev) <= rtol * max(1.0, abs(mean)):
            break
        if n > 2**16:
            raise WindingError("Jensen average did not converge")
        prev, n = mean, 2 * n
    return (mean - math.log(abs(g0))) / math.log(R_ / r_)


# ---------------------------------------------------------------------------
# end-to-end locator


def block_determinant(engine, m, p=2):
    """``k -> det_{ceil p}(I + T_m(k))`` for one angular-momentum block."""
    from .birman_schwinger import det_p
    from .landau_core import KPoint

    def f(k):
        k = complex(k)
        kp = KPoint(k, branch=1 if k.imag > 0 else -1)
        return det_p(-engine.block(m, kp), p)

    return f


def block_winding_function(engine, m):
    """``k -> det(I + T_m(k))``, used for winding numbers.

    ``det_{ceil p}(I + T)`` equals this times ``exp(-tr T + ...)``, an
    exponential of a function analytic on the region.  That factor has no
    zeros and a single-valued logarithm, so its winding around any closed
    contour is zero and both functions have the same zeros with the same
    multiplicities.  Near ``k = 0`` the exponential spins quickly because
    ``tr T`` grows like ``1/k``; leaving it out keeps the phase tame.
    """
    from .landau_core import KPoint

    def f(k):
        k = complex(k)
        kp = KPoint(k, branch=1 if k.imag > 0 else -1)
        T = engine.block(m, kp)
        return np.linalg.det(np.eye(T.shape[0]) + T)

    return f


def _threads(threads):
    env = os.environ.get("LANDAU_THREADS")
    if env:
        return max(1, int(env))
    return max(1, int(threads or 1))


def eigenvalues_near_level(pot, basis, q, region, tol=1e-6, b=None, threads=1, m_values=None):
    """Discrete eigenvalues ``z = Lambda_q + k^2`` for ``k`` in ``region``.

    Each angular-momentum block has its own determinant; the zeros of the full
    determinant are the union of the block zeros.
    """
    from .birman_schwinger import _engine

    if b is None:
        raise ValueError("field strength b is required")
    if q != basis.q_center:
        raise ValueError(f"basis is centred on level {basis.q_center}, not {q}")
    if region.branch == 0:
        raise ValueError("eigenvalue scans need a region inside one half disk (branch +-1)")
    if pot.epsilon == 0:
        return []
    eng = _engine(pot, basis, float(b))
    ms = list(m_values) if m_values is not None else list(eng.angular_momenta)
    lam = 2.0 * b * q

    def scan(m):
        g = block_winding_function(eng, m)
        f = block_determinant(eng, m, pot.p)
        recs = []
        for k, mult in locate_zeros(g, region, tol):
            recs.append(EigenvalueRecord(z=lam + k * k, k=k, multiplicity=mult, method="determinant", residual=abs(f(k)), stable=True, m=m))
        return recs

    n = _threads(threads)
    if n > 1:
        with ThreadPoolExecutor(n) as ex:
            results = list(ex.map(scan, ms))
    else:
        results = [scan(m) for m in ms]
    out = [r for rs in results for r in rs]
    out.sort(key=lambda r: (-abs(r.k), r.m))
    return out
