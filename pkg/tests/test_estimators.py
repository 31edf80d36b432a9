import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from landau_spectra.estimators import DenseOracle, EigenvalueLocator, ToeplitzCounter
from landau_spectra.potentials import LongitudinalProfile, SeparablePotential, TransverseProfile

POT = SeparablePotential(TransverseProfile("gaussian", mu=1.0), LongitudinalProfile("gaussian", mu=0.25), alpha=0.75 * math.pi, epsilon=0.2)


def test_toeplitz_counter():
    unit = {"F": {"family": "gaussian", "mu": 1.0}, "G": {"family": "gaussian", "mu": 1.0}, "epsilon": 2 / math.sqrt(math.pi)}
    est = ToeplitzCounter(b=2.0, m_max=20)
    with pytest.raises(NotFittedError):
        est.transform([0.1])
    est.fit(unit)
    assert est.mu_[:3] == pytest.approx([0.5, 0.25, 0.125], rel=1e-9)
    assert list(est.transform([0.3, 0.1, 0.01])) == [1, 3, 6]
    assert clone(est).get_params() == {"b": 2.0, "m_max": 20, "q": 0, "r_min": None}
    with pytest.raises(TypeError):
        est.fit(np.zeros((3, 3)))


def test_locator_and_oracle_agree():
    loc = EigenvalueLocator(m_max=1, n_max=16, J=2, rho_min=0.05, tol=1e-9).fit(POT)
    z = loc.predict()
    assert len(z) == 2
    orc = DenseOracle(m_max=1, J=2, n_max=200, hermite_scale=10.0, rho_min=0.05).fit(POT)
    zs = orc.z_[orc.stable_]
    for zi in z:
        assert np.min(np.abs(zs - zi)) / abs(zi) < 1e-3
    assert orc.get_params()["enlarge"] == 1.25
