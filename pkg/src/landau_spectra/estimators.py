"""Estimator-style wrappers.

``fit`` takes a :class:`SeparablePotential` (or its dict form) where the usual
estimator API expects a data matrix, so these classes get ``get_params``,
``set_params``, cloning and the fitted-attribute convention without pretending
to learn from samples.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_fitted, check_positive
from .birman_schwinger import GalerkinBasis, default_hermite_scale
from .oracle import dense_eigenvalues, dense_hamiltonian
from .potentials import SeparablePotential, effective_W
from .toeplitz import counting, toeplitz_spectrum_radial
from .zero_finder import KRegion, eigenvalues_near_level

__all__ = ["ToeplitzCounter", "EigenvalueLocator", "DenseOracle"]


def _potential(X):
    if isinstance(X, SeparablePotential):
        return X
    if isinstance(X, dict):
        return SeparablePotential.from_dict(X)
    raise TypeError(f"expected a SeparablePotential or its dict form, got {type(X).__name__}")


class ToeplitzCounter(TransformerMixin, BaseEstimator):
    """Toeplitz spectrum of the effective potential; ``transform`` maps radii to counts."""

    def __init__(self, b=2.0, q=0, m_max=None, r_min=None):
        self.b = b
        self.q = q
        self.m_max = m_max
        self.r_min = r_min

    def fit(self, X, y=None):
        check_positive(self.b, "b")
        self.spectrum_ = toeplitz_spectrum_radial(self.q, self.b, effective_W(_potential(X)), m_max=self.m_max, r_min=self.r_min)
        self.mu_ = self.spectrum_.mu
        self.m_index_ = self.spectrum_.m_index
        return self

    def transform(self, X):
        check_fitted(self, "spectrum_")
        r = np.asarray(X, dtype=float)
        return np.vectorize(lambda v: counting(self.spectrum_, v), otypes=[int])(r)


class EigenvalueLocator(BaseEstimator):
    """Zeros of the perturbation determinant near ``Lambda_q``."""

    def __init__(self, b=2.0, q=0, J=3, m_max=12, n_max=20, hermite_scale=None, eta=1.9, rho_min=None, branch=1, tol=1e-6, threads=1):
        self.b = b
        self.q = q
        self.J = J
        self.m_max = m_max
        self.n_max = n_max
        self.hermite_scale = hermite_scale
        self.eta = eta
        self.rho_min = rho_min
        self.branch = branch
        self.tol = tol
        self.threads = threads

    def _setup(self, pot):
        scale = self.hermite_scale if self.hermite_scale is not None else default_hermite_scale(pot.G)
        basis = GalerkinBasis.around(self.q, self.J, self.m_max, self.n_max, scale)
        region = KRegion.half_disk(self.eta, self.branch, rho_min=self.rho_min)
        return basis, region

    def fit(self, X, y=None):
        pot = _potential(X)
        self.basis_, self.region_ = self._setup(pot)
        self.records_ = eigenvalues_near_level(pot, self.basis_, self.q, self.region_, self.tol, b=self.b, threads=self.threads)
        self.z_ = np.array([r.z for r in self.records_], dtype=complex)
        self.k_ = np.array([r.k for r in self.records_], dtype=complex)
        return self

    def predict(self, X=None):
        """Located eigenvalues ``z``; refits when a new potential is passed."""
        if X is not None:
            self.fit(X)
        check_fitted(self, "z_")
        return self.z_


class DenseOracle(EigenvalueLocator):
    """Brute-force eigenvalues on a large Hermite basis, tagged by stability."""

    def __init__(self, b=2.0, q=0, J=3, m_max=12, n_max=240, hermite_scale=10.0, eta=1.9, rho_min=None, branch=1, enlarge=1.25, drift_tol=1e-3):
        super().__init__(b=b, q=q, J=J, m_max=m_max, n_max=n_max, hermite_scale=hermite_scale, eta=eta, rho_min=rho_min, branch=branch)
        self.enlarge = enlarge
        self.drift_tol = drift_tol

    def fit(self, X, y=None):
        pot = _potential(X)
        self.basis_, self.region_ = self._setup(pot)
        model = dense_hamiltonian(pot, self.basis_, self.b)
        self.records_ = dense_eigenvalues(model, self.region_, pot=pot, enlarge=self.enlarge, drift_tol=self.drift_tol)
        self.z_ = np.array([r.z for r in self.records_], dtype=complex)
        self.k_ = np.array([r.k for r in self.records_], dtype=complex)
        self.stable_ = np.array([r.stable for r in self.records_], dtype=bool)
        return self
