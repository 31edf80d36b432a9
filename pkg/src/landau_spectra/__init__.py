"""Complex eigenvalues of non-self-adjoint perturbations of the 3D Landau Hamiltonian.

Submodules: ``landau_core`` (special functions, branches), ``potentials``,
``toeplitz`` (Landau-level Toeplitz spectra and counting), ``birman_schwinger``
(operator assembly and regularized determinants), ``zero_finder`` (argument
principle), ``oracle`` (dense eigensolver), ``analysis`` and ``cli``.
"""
from .analysis import SectorSpec, check_numerical_range, check_theorem2, check_theorem4, check_theorem6, sector_classify, sector_report
from .birman_schwinger import GAMMA_P, BSEngine, GalerkinBasis, assemble_T, det_p, kkstar_check, split_singular
from .estimators import DenseOracle, EigenvalueLocator, ToeplitzCounter
from .landau_core import BranchCutError, KPoint, MagneticConfig, k_from_z, param_z, sqrt_branch
from .oracle import dense_eigenvalues, dense_hamiltonian
from .potentials import LongitudinalProfile, SeparablePotential, TransverseProfile, check_assumptions, effective_W
from .toeplitz import asymptotic_comparator, cluster_radii, counting, toeplitz_spectrum_radial
from .zero_finder import EigenvalueRecord, KRegion, eigenvalues_near_level, locate_zeros, winding_index

__version__ = "0.1.0"

__all__ = [
    "MagneticConfig",
    "KPoint",
    "BranchCutError",
    "sqrt_branch",
    "param_z",
    "k_from_z",
    "TransverseProfile",
    "LongitudinalProfile",
    "SeparablePotential",
    "effective_W",
    "check_assumptions",
    "toeplitz_spectrum_radial",
    "counting",
    "asymptotic_comparator",
    "cluster_radii",
    "GalerkinBasis",
    "BSEngine",
    "assemble_T",
    "split_singular",
    "kkstar_check",
    "det_p",
    "GAMMA_P",
    "KRegion",
    "EigenvalueRecord",
    "winding_index",
    "locate_zeros",
    "eigenvalues_near_level",
    "dense_hamiltonian",
    "dense_eigenvalues",
    "SectorSpec",
    "sector_classify",
    "sector_report",
    "check_theorem2",
    "check_theorem4",
    "check_theorem6",
    "check_numerical_range",
    "ToeplitzCounter",
    "EigenvalueLocator",
    "DenseOracle",
]
