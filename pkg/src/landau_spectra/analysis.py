"""Sector geometry around a Landau level and checks of the predicted counts."""
from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import check_nonnegative_int, check_positive
from .toeplitz import counting, counting_band

__all__ = [
    "SectorSpec",
    "Classification",
    "SectorReport",
    "Verdict",
    "ScanIncompleteError",
    "sector_classify",
    "sector_report",
    "check_theorem2",
    "check_theorem4",
    "check_theorem6",
    "check_numerical_range",
]


class ScanIncompleteError(ValueError):
    """The scanned region does not cover the annulus a check needs."""


@dataclass(frozen=True)
class SectorSpec:
    """Localization sector of half-width ``2 theta`` around ``arg(z - Lambda_q) = 2 alpha -+ pi``."""

    alpha: float
    theta: float
    branch: int
    q: int
    b: float

    def __post_init__(self):
        check_positive(self.theta, "theta")
        if not 4 * self.theta < math.pi / 2:
            raise ValueError(f"theta={self.theta} too large: need 4 theta < pi/2")
        if self.branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")
        check_nonnegative_int(self.q, "q")
        check_positive(self.b, "b")

    @property
    def delta(self):
        return math.tan(self.theta)

    @property
    def axis(self):
        """``2 alpha - pi`` on the upper half plane, ``2 alpha + pi`` on the lower."""
        return 2 * self.alpha - self.branch * math.pi

    @property
    def level(self):
        return 2.0 * self.b * self.q


def _angle_gap(a, b):
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


@dataclass(frozen=True)
class Classification:
    region: str  # "sector", "free" or "outside"
    angle: float
    modulus: float
    band: int | None = None


def sector_classify(z, spec, bands=None):
    """Classify ``z`` against the sector of ``spec``.

    ``region`` is ``"sector"`` or ``"free"`` for ``0 < |z - Lambda_q| < 2b``
    and ``"outside"`` beyond.  ``bands`` is a list of ``(a1, a2)`` moduli;
    ``band`` is the index of the first one with ``a1 < |z - Lambda_q| < a2``.
    """
    d = complex(z) - spec.level
    if d == 0:
        raise ValueError("z sits on the Landau level")
    ang = cmath.phase(d)
    mod = abs(d)
    if mod >= 2 * spec.b:
        region = "outside"
    elif _angle_gap(ang, spec.axis) < 2 * spec.theta:
        region = "sector"
    else:
        region = "free"
    band = None
    for i, (a1, a2) in enumerate(bands or ()):
        if a1 < mod < a2:
            band = i
            break
    return Classification(region, ang, mod, band)


@dataclass
class Verdict:
    name: str
    passed: bool
    rows: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


@dataclass
class SectorReport:
    spec: SectorSpec
    records: list
    classes: list
    bands: list
    band_counts: list
    verdicts: list = field(default_factory=list)

    @property
    def counts(self):
        out = {"sector": 0, "free": 0, "outside": 0}
        for r, c in zip(self.records, self.classes):
            out[c.region] += r.multiplicity
        return out

    def to_dict(self):
        return {
            "sector": {**asdict(self.spec), "delta": self.spec.delta, "axis": self.spec.axis},
            "counts": self.counts,
            "bands": [list(b) for b in self.bands],
            "band_counts": self.band_counts,
            "eigenvalues": [
                {
                    "re_z": r.z.real,
                    "im_z": r.z.imag,
                    "m": r.m,
                    "multiplicity": r.multiplicity,
                    "method": r.method,
                    "region": c.region,
                    "angle": c.angle,
                    "modulus": c.modulus,
                    "band": c.band,
                }
                for r, c in zip(self.records, self.classes)
            ],
            "verdicts": [v.to_dict() for v in self.verdicts],
        }


def sector_report(records, spec, bands=()):
    classes = [sector_classify(r.z, spec, bands) for r in records]
    counts = [sum(r.multiplicity for r, c in zip(records, classes) if c.band == i) for i in range(len(bands))]
    return SectorReport(spec, list(records), classes, [tuple(b) for b in bands], counts)


def _side(records, spec):
    return [r for r in records if spec.branch * (r.z - spec.level).imag > 0]


def check_theorem2(eigs, toeplitz, r_ladder, spec, nu_im_cutoff=0.01, scanned=None, factor=10.0):
    """Counts in ``Omega_{q,nu}(r^2, 4 r^2)`` against ``Tr 1_{(r,inf)}(P_q W P_q) |ln r|``.

    ``toeplitz`` must carry the coupling.  ``nu = nu_im_cutoff * 2 r^2``.
    ``scanned = (rho_min, rho_max)`` is the ``|k|`` range actually searched;
    annuli outside it raise :class:`ScanIncompleteError`.  The verdict passes
    when every finite ratio stays within ``factor`` times their median.  A
    radius with a vanishing driver but a nonzero count lies above the range
    where the estimate is asymptotic; it is reported and left out.
    """
    if not 0 < nu_im_cutoff < 1:
        raise ValueError("nu_im_cutoff is a fraction of 2 r^2 and must lie in (0, 1)")
    recs = _side(eigs, spec)
    rows = []
    for r in sorted(r_ladder, reverse=True):
        if scanned is not None and (r * r < scanned[0] ** 2 * (1 - 1e-12) or 4 * r * r > scanned[1] ** 2 * (1 + 1e-12)):
            raise ScanIncompleteError(
                f"annulus ({r * r:.3g}, {4 * r * r:.3g}) is not inside the scanned |z - Lambda_q| range "
                f"({scanned[0] ** 2:.3g}, {scanned[1] ** 2:.3g})"
            )
        nu = nu_im_cutoff * 2 * r * r
        count = sum(
            x.multiplicity for x in recs if r * r < abs(x.z - spec.level) < 4 * r * r and abs(x.z.imag) > nu
        )
        tr = counting(toeplitz, r)
        driver = tr * abs(math.log(r))
        ratio = count / driver if driver > 0 else (0.0 if count == 0 else math.inf)
        rows.append({"r": r, "nu": nu, "count": count, "trace": tr, "driver": driver, "ratio": ratio})
    finite = [row["ratio"] for row in rows if math.isfinite(row["ratio"])]
    pre = [row["r"] for row in rows if not math.isfinite(row["ratio"])]
    med = float(np.median(finite)) if finite else 0.0
    if med > 0:
        passed = all(x <= factor * med for x in finite)
    else:
        passed = all(x == 0 for x in finite)
    return Verdict(
        "theorem2_upper_bound",
        bool(passed and finite),
        rows,
        {"median_ratio": med, "factor": factor, "pre_asymptotic_r": pre},
    )


def check_theorem4(eigs, ladder, toeplitz_unit, epsilon, spec, scanned, n_clusters=2):
    """Cluster lower bounds and the free region.

    ``toeplitz_unit`` and ``ladder`` belong to the effective potential at unit
    coupling.  For each of the first ``n_clusters`` rungs the count in
    ``Omega(eps^2 r_{l+1}^2, eps^2 r_l^2)`` inside the sector must reach
    ``Tr 1_{(r_{l+1}, r_l)}``.  The free region, between ``rho_min^2`` and
    ``rho_max^2`` of the scanned ``|k|`` range, must hold no eigenvalue.
    """
    if len(ladder.radii) < n_clusters + 1:
        raise ValueError(f"ladder has {len(ladder.radii)} radii, {n_clusters + 1} needed ({ladder.diagnostic})")
    recs = _side(eigs, spec)
    lo_scan, hi_scan = scanned[0] ** 2, scanned[1] ** 2
    rows = []
    ok = True
    for ell in range(n_clusters):
        r_hi, r_lo = ladder.radii[ell], ladder.radii[ell + 1]
        a1, a2 = epsilon**2 * r_lo**2, epsilon**2 * r_hi**2
        if a1 < lo_scan * (1 - 1e-12) or a2 > hi_scan * (1 + 1e-12):
            raise ScanIncompleteError(f"cluster annulus ({a1:.3g}, {a2:.3g}) leaves the scanned range ({lo_scan:.3g}, {hi_scan:.3g})")
        count = 0
        for x in recs:
            c = sector_classify(x.z, spec)
            if c.region == "sector" and a1 < c.modulus < a2:
                count += x.multiplicity
        need = counting_band(toeplitz_unit, r_lo, r_hi)
        rows.append({"ell": ell, "a1": a1, "a2": a2, "count": count, "lower_bound": need, "passed": count >= need})
        ok &= count >= need
    free = sum(
        x.multiplicity
        for x in recs
        if sector_classify(x.z, spec).region == "free" and lo_scan < abs(x.z - spec.level) < hi_scan
    )
    return Verdict(
        "theorem4_clusters_and_free_region",
        bool(ok and free == 0),
        rows,
        {"free_region_count": free, "free_region": [lo_scan, hi_scan]},
    )


def check_theorem6(eigs, spec, eta):
    """No eigenvalues in ``Omega_q(0, eta^2)`` outside the sector; none at all when
    ``alpha`` lies in ``(0, pi/2)`` (mirrored for the lower half plane)."""
    recs = [x for x in _side(eigs, spec) if abs(x.z - spec.level) < eta**2]
    s = math.sin(spec.alpha)
    c = math.cos(spec.alpha)
    accumulating = spec.branch * s > 0 and c < 0
    if accumulating:
        bad = [x for x in recs if sector_classify(x.z, spec).region != "sector"]
    else:
        bad = recs
    return Verdict(
        "theorem6_no_eigenvalues" if not accumulating else "theorem6_outside_sector",
        len(bad) == 0,
        [{"re_z": x.z.real, "im_z": x.z.imag, "m": x.m} for x in bad],
        {"accumulating_phase": accumulating, "eta": eta, "considered": len(recs)},
    )


def check_numerical_range(eigs, sup_norm, tol=1e-8):
    """``|Im z| <= epsilon ||W||_inf + tol`` for every record."""
    bad = [x for x in eigs if abs(x.z.imag) > sup_norm + tol]
    return Verdict(
        "numerical_range",
        not bad,
        [{"re_z": x.z.real, "im_z": x.z.imag} for x in bad],
        {"bound": sup_norm + tol, "checked": len(eigs)},
    )
