import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landau_spectra.birman_schwinger import BSEngine, GalerkinBasis
from landau_spectra.landau_core import KPoint
from landau_spectra.potentials import LongitudinalProfile, SeparablePotential, TransverseProfile
from landau_spectra.zero_finder import (
    ContourZeroError,
    EigenvalueRecord,
    KRegion,
    block_determinant,
    block_winding_function,
    eigenvalues_near_level,
    jensen_bound,
    locate_zeros,
    winding_index,
)


def circle(n=64, c=0.0, r=1.0):
    return [c + r * cmath.exp(2j * math.pi * t / n) for t in range(n)]


def test_winding_examples():
    assert winding_index(lambda k: k, circle()) == 1
    assert winding_index(lambda k: (k - 0.3) ** 2 * (k + 2), circle()) == 2
    assert winding_index(np.exp, circle(8, 0.3, 5.0)) == 0
    assert winding_index(lambda k: 1 / (k - 0.1), circle()) == -1


def test_winding_reports_contour_zero():
    with pytest.raises(ContourZeroError) as err:
        winding_index(lambda k: k - 1.0, circle(4))
    assert err.value.min_modulus == 0


def test_locate_examples():
    region = KRegion.rectangle(-1, 1, -1, 1)
    k0, k1 = 0.3 + 0.2j, -0.4 - 0.5j
    found = locate_zeros(lambda k: (k - k0) * (k - k1), region, tol=1e-9)
    assert sorted(m for _, m in found) == [1, 1]
    assert min(abs(k - k0) for k, _ in found) < 1e-8 and min(abs(k - k1) for k, _ in found) < 1e-8
    assert locate_zeros(np.exp, region) == []
    double = locate_zeros(lambda k: (k - k0) ** 2, region, tol=1e-7)
    assert len(double) == 1 and double[0][1] == 2 and abs(double[0][0] - k0) < 1e-6


def test_zero_on_split_line_is_dodged():
    # the first split of [-1, 1]^2 passes through 0
    found = locate_zeros(lambda k: k * (k - 0.5j), KRegion.rectangle(-1, 1, -1, 1), tol=1e-9)
    assert len(found) == 2 and min(abs(k) for k, _ in found) < 1e-8


def test_polar_region():
    reg = KRegion.half_disk(1.0, 1, margin=1e-3, rho_min=0.05)
    k0 = 0.3 * cmath.exp(0.7j)
    found = locate_zeros(lambda k: (k - k0) * (k + k0), reg, tol=1e-10)
    assert len(found) == 1 and abs(found[0][0] - k0) < 1e-9
    assert reg.contains(k0) and not reg.contains(-k0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_winding_additivity(seed):
    rng = np.random.default_rng(seed)
    zeros = rng.uniform(-1.5, 1.5, 3) + 1j * rng.uniform(-1.5, 1.5, 3)
    poles = rng.uniform(-1.5, 1.5, 2) + 1j * rng.uniform(-1.5, 1.5, 2)
    f = lambda k: np.prod(k - zeros) / np.prod(k - poles)
    xs = sorted(rng.uniform(-1, 1, 1)) + [1.0]
    pts = [-1.0] + xs
    boxes = [[complex(a, -1), complex(b, -1), complex(b, 1), complex(a, 1)] for a, b in zip(pts, pts[1:])]
    whole = [complex(-1, -1), complex(1, -1), complex(1, 1), complex(-1, 1)]

    def refined(poly, n=40):
        out = []
        for a, b in zip(poly, poly[1:] + poly[:1]):
            out += [a + (b - a) * t / n for t in range(n)]
        return out

    try:
        total = winding_index(f, refined(whole))
        parts = [winding_index(f, refined(bx)) for bx in boxes]
    except ContourZeroError:
        return
    inside = lambda p, bx: bx[0].real < p.real < bx[1].real and -1 < p.imag < 1
    assert total == sum(parts)
    assert total == sum(inside(z, whole) for z in zeros) - sum(inside(p, whole) for p in poles)


def test_jensen_examples():
    dom, sub = (0.0, 1.0), (0.0, 0.3)
    assert jensen_bound(lambda z: np.exp(z) + 3, dom, 0.1, sub) >= 0
    c = 0.1 + 0.05j
    g = lambda z: z - c
    bound = jensen_bound(g, dom, 0.35, sub)
    assert bound >= 1
    assert jensen_bound(lambda z: 10 * g(z), dom, 0.35, sub) == pytest.approx(bound, rel=1e-10)
    with pytest.raises(ValueError):
        jensen_bound(g, dom, c, sub)
    with pytest.raises(ValueError):
        jensen_bound(g, dom, 0.9, sub)


def test_record_and_region_validation():
    rec = EigenvalueRecord(z=0.1 + 0.2j, k=0.3 + 0.3j, multiplicity=1, method="oracle", residual=0.0)
    assert rec.csv_row()[-2:] == ["oracle", "true"]
    assert rec.csv_row()[0] == format(0.1, ".17g")
    with pytest.raises(ValueError):
        EigenvalueRecord(0j, 0j, 0, "determinant")
    with pytest.raises(ValueError):
        KRegion.rectangle(0.0, 2.0, 0.1, 0.5, branch=1, eta=1.0)
    with pytest.raises(ValueError):
        KRegion.rectangle(0.0, 0.5, 0.1, 0.5, branch=1, eta=1.0, margin=0.01)


POT = SeparablePotential(TransverseProfile("gaussian", mu=1.0), LongitudinalProfile("gaussian", mu=0.25), alpha=0.75 * math.pi, epsilon=0.2)
BASIS = GalerkinBasis.around(0, 2, 3, 12, 2.0)


def test_scan_with_zero_coupling_is_empty():
    reg = KRegion.half_disk(1.9, 1, rho_min=0.03)
    assert eigenvalues_near_level(POT.with_epsilon(0.0), BASIS, 0, reg, b=2.0) == []


def test_winding_and_regularized_determinant_share_zeros():
    eng = BSEngine(POT, BASIS, 2.0)
    g, f = block_winding_function(eng, 0), block_determinant(eng, 0)
    reg = KRegion.half_disk(1.9, 1, rho_min=0.03)
    (k0, mult), = locate_zeros(g, reg, tol=1e-11)
    assert mult == 1
    assert abs(f(k0)) < 1e-8 * abs(f(k0 * 1.01))
    # trace-form index (1/2 pi i) \oint tr((I+T)^{-1} T') around the zero
    def dlog(k, h=1e-7):
        T = eng.block(0, KPoint(k))
        dT = (eng.block(0, KPoint(k + h)) - eng.block(0, KPoint(k - h))) / (2 * h)
        return np.trace(np.linalg.solve(np.eye(T.shape[0]) + T, dT))

    rad = 0.2 * abs(k0)
    n = 256
    ts = 2 * math.pi * np.arange(n) / n
    ind = sum(dlog(k0 + rad * cmath.exp(1j * t)) * 1j * rad * cmath.exp(1j * t) for t in ts) * (2 * math.pi / n) / (2j * math.pi)
    assert abs(ind - 1) < 1e-6


def test_threads_give_identical_results(monkeypatch):
    reg = KRegion.half_disk(1.9, 1, rho_min=0.03)
    one = eigenvalues_near_level(POT, BASIS, 0, reg, 1e-9, b=2.0, threads=1)
    monkeypatch.setenv("LANDAU_THREADS", "3")
    three = eigenvalues_near_level(POT, BASIS, 0, reg, 1e-9, b=2.0, threads=1)
    assert [r.z for r in one] == [r.z for r in three]
    assert len(one) >= 2
