import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from landau_spectra.potentials import TransverseProfile
from landau_spectra.toeplitz import (
    ToeplitzSpectrum,
    TruncationWarning,
    asymptotic_comparator,
    cluster_radii,
    counting,
    counting_band,
    power_constant,
    toeplitz_matrix_general,
    toeplitz_spectrum_radial,
)

GAUSS = TransverseProfile("gaussian", mu=1.0)


@pytest.fixture(scope="module")
def gauss_spec():
    return toeplitz_spectrum_radial(0, 2.0, GAUSS, m_max=40)


def test_gaussian_exact(gauss_spec):
    expected = 2.0 ** -(np.arange(41) + 1.0)
    assert np.max(np.abs(gauss_spec.mu / expected - 1)) < 1e-10
    assert list(gauss_spec.m_index[:3]) == [0, 1, 2]


@pytest.mark.parametrize("mu,b", [(0.5, 1.0), (2.0, 3.0)])
def test_gaussian_geometric_ratio(mu, b):
    spec = toeplitz_spectrum_radial(0, b, TransverseProfile("gaussian", mu=mu), m_max=15)
    rho = b / (b + 2 * mu)
    assert spec.mu == pytest.approx(rho ** (np.arange(16) + 1.0), rel=1e-10)


def test_disk_first_eigenvalue():
    spec = toeplitz_spectrum_radial(0, 2.0, TransverseProfile("disk", radius=1.0), m_max=10)
    assert spec.mu[0] == pytest.approx(1 - math.exp(-1), rel=1e-10)


@pytest.mark.parametrize("q", [0, 1, 2])
def test_contraction(q):
    w = TransverseProfile("power", m_perp=3.0, amplitude=2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        spec = toeplitz_spectrum_radial(q, 1.0, w, m_max=30)
    assert spec.converged
    assert np.all(spec.mu <= w.sup) and np.all(spec.mu > 0)
    assert len(spec) == 30 + q + 1


def test_general_matrix_radial_is_diagonal_and_matches():
    b = 2.0
    M = toeplitz_matrix_general(0, b, lambda x, y: np.exp(-(x * x + y * y)), 12)
    off = M - np.diag(np.diag(M))
    assert np.max(np.abs(off)) < 1e-9
    ev = np.sort(np.linalg.eigvalsh(M))[::-1]
    assert ev == pytest.approx(toeplitz_spectrum_radial(0, b, GAUSS, m_max=12).mu, abs=1e-8)
    assert np.min(ev) > -1e-10


def test_general_matrix_constant_symbol():
    M = toeplitz_matrix_general(1, 1.5, lambda x, y: 0.7 + 0 * x, 8)
    assert np.max(np.abs(M - 0.7 * np.eye(M.shape[0]))) < 1e-10


def test_general_matrix_nonradial_hermitian_psd():
    sym = lambda x, y: np.exp(-((x - 0.5) ** 2) - 2 * y * y)
    M = toeplitz_matrix_general(0, 2.0, sym, 10)
    assert np.max(np.abs(M - M.conj().T)) < 1e-14
    assert np.min(np.linalg.eigvalsh(M)) > -1e-10


def test_counting_examples(gauss_spec):
    assert counting(gauss_spec, 0.3) == 1
    assert counting(gauss_spec, 0.51) == 0
    assert counting(gauss_spec, 1.0) == 0
    with pytest.warns(TruncationWarning):
        assert counting(gauss_spec, 1e-15) == 41
    assert counting_band(gauss_spec, 0.1, 0.3) == 2


@settings(max_examples=100, deadline=None)
@given(st.floats(-14.0, -1.0), st.floats(0.0, 3.0))
def test_counting_monotone_and_gaussian_formula(log2r, step):
    spec = ToeplitzSpectrum(0, 2.0, 2.0 ** -(np.arange(60) + 1.0), 59, np.arange(60), 2.0**-60)
    r1, r2 = 2.0**log2r, 2.0 ** (log2r + step)
    assert counting(spec, r1) >= counting(spec, r2)
    if abs(log2r - round(log2r)) > 1e-9:
        assert counting(spec, r1) == math.floor(abs(math.log(r1)) / math.log(2.0))


def test_comparator_examples():
    assert power_constant(2.0, 4) == pytest.approx(1.0)
    assert power_constant(3.0, 6, u0=lambda th: np.ones_like(th)) == pytest.approx(1.5)
    assert asymptotic_comparator("gaussian", math.exp(-5), 2.0, beta=1.0, mu=1.0) == pytest.approx(5 / math.log(2), rel=1e-12)
    assert asymptotic_comparator("compact", math.exp(-5), 2.0) == pytest.approx(5 / math.log(5), rel=1e-12)
    assert asymptotic_comparator("power", 1e-4, 2.0, m=4) == pytest.approx(100.0)
    with pytest.raises(ValueError):
        asymptotic_comparator("compact", 0.5, 2.0)
    with pytest.raises(ValueError):
        asymptotic_comparator("elliptic", 0.1, 2.0)


def test_gaussian_comparator_branches():
    r = math.exp(-10)
    # beta < 1: (b/2) mu^{-1/beta} |ln r|^{1/beta}
    assert asymptotic_comparator("gaussian", r, 2.0, beta=0.5, mu=1.0) == pytest.approx(100.0)
    # beta > 1: beta/(beta-1) |ln r| / ln|ln r|
    assert asymptotic_comparator("gaussian", r, 2.0, beta=2.0, mu=1.0) == pytest.approx(20 / math.log(10))


def test_cluster_radii_examples(gauss_spec):
    ladder = cluster_radii(gauss_spec, 0.25)
    ell = np.arange(len(ladder))
    assert len(ladder) == 40
    assert ladder.radii == pytest.approx(2.0 ** -(ell + 1.5), rel=1e-9)
    for r in ladder.radii:
        assert np.min(np.abs(gauss_spec.mu - r)) >= 0.25 * r / 2
    with pytest.warns(RuntimeWarning):
        assert len(cluster_radii(gauss_spec, 0.75)) == 0
    single = ToeplitzSpectrum(0, 2.0, np.array([0.5]), 0, np.array([0]), 0.5)
    assert len(cluster_radii(single, 0.25)) == 0


def test_auto_truncation_reaches_floor():
    w = TransverseProfile("power", m_perp=4.0)
    spec = toeplitz_spectrum_radial(0, 2.0, w, r_min=1e-3)
    assert spec.floor < 1e-6
    assert spec.mu[-1] == spec.floor
