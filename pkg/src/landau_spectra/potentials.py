"""Separable non-self-adjoint perturbations and their effective potential.

The perturbation is ``W(X, x3) = epsilon * exp(i alpha) * F(|X|) * G(x3)``
with positive profiles ``F`` and ``G``.  The effective transverse potential is
half the longitudinal integral of ``|W|``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from ._validation import check_nonnegative, check_positive

__all__ = [
    "TransverseProfile",
    "LongitudinalProfile",
    "SeparablePotential",
    "EffectiveW",
    "IntegrabilityError",
    "evaluate_W",
    "effective_W",
    "check_assumptions",
    "AssumptionReport",
]

TRANSVERSE_FAMILIES = ("power", "gaussian", "disk")
LONGITUDINAL_FAMILIES = ("power", "gaussian")


class IntegrabilityError(ValueError):
    """The longitudinal profile is not integrable."""


@dataclass(frozen=True)
class TransverseProfile:
    """Radial profile ``F``.

    Families and their parameters:

    ``power``     ``amplitude * <r>**(-m_perp)``
    ``gaussian``  ``amplitude * exp(-mu * r**(2 beta))``
    ``disk``      ``amplitude`` on ``r <= radius``, zero outside
    """

    family: str
    amplitude: float = 1.0
    m_perp: float = 2.0
    mu: float = 1.0
    beta: float = 1.0
    radius: float = 1.0

    def __post_init__(self):
        if self.family not in TRANSVERSE_FAMILIES:
            raise ValueError(f"unknown transverse family {self.family!r}; expected one of {TRANSVERSE_FAMILIES}")
        check_positive(self.amplitude, "amplitude")
        if self.family == "power":
            check_positive(self.m_perp, "m_perp")
        elif self.family == "gaussian":
            check_positive(self.mu, "mu")
            check_positive(self.beta, "beta")
        else:
            check_positive(self.radius, "radius")

    def log_value(self, r):
        r = np.asarray(r, dtype=float)
        la = math.log(self.amplitude)
        if self.family == "power":
            return la - 0.5 * self.m_perp * np.log1p(r * r)
        if self.family == "gaussian":
            return la - self.mu * r ** (2 * self.beta)
        return np.where(r <= self.radius, la, -np.inf)

    def __call__(self, r):
        return np.exp(self.log_value(r))

    @property
    def sup(self):
        return self.amplitude

    @property
    def breakpoints(self):
        """Radii where the profile is not smooth."""
        return (self.radius,) if self.family == "disk" else ()

    def lp_finite(self, s):
        """Whether ``F`` lies in ``L^s(R^2)``."""
        if self.family == "power":
            return self.m_perp * s > 2
        return True

    def scaled(self, c):
        return replace(self, amplitude=self.amplitude * c)

    def to_dict(self):
        keep = {"power": ("m_perp",), "gaussian": ("mu", "beta"), "disk": ("radius",)}[self.family]
        d = {"family": self.family, "amplitude": self.amplitude}
        d.update({k: getattr(self, k) for k in keep})
        return d


@dataclass(frozen=True)
class LongitudinalProfile:
    """Profile ``G`` along the field: ``power`` is ``amplitude * <x>**(-m)``,
    ``gaussian`` is ``amplitude * exp(-mu x**2)``."""

    family: str
    amplitude: float = 1.0
    m: float = 4.0
    mu: float = 1.0

    def __post_init__(self):
        if self.family not in LONGITUDINAL_FAMILIES:
            raise ValueError(f"unknown longitudinal family {self.family!r}; expected one of {LONGITUDINAL_FAMILIES}")
        check_positive(self.amplitude, "amplitude")
        if self.family == "power":
            check_positive(self.m, "m")
        else:
            check_positive(self.mu, "mu")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "power":
            return self.amplitude * (1.0 + x * x) ** (-0.5 * self.m)
        return self.amplitude * np.exp(-self.mu * x * x)

    def sqrt(self, x):
        return np.sqrt(self(x))

    @property
    def sup(self):
        return self.amplitude

    @property
    def decay_exponent(self):
        """Power-law decay exponent; ``inf`` for the gaussian family."""
        return self.m if self.family == "power" else math.inf

    def support_halfwidth(self, rel=1e-18):
        """Half-width outside which ``G`` is below ``rel * sup G``."""
        if self.family == "gaussian":
            return math.sqrt(-math.log(rel) / self.mu)
        return math.sqrt(rel ** (-2.0 / self.m) - 1.0)

    def integral(self, rtol=1e-10):
        if self.family == "power" and self.m <= 1:
            raise IntegrabilityError(f"<x3>^-{self.m} is not integrable (need m > 1)")
        val, _ = integrate.quad(self, -np.inf, np.inf, epsrel=rtol, epsabs=0, limit=400)
        return val

    def to_dict(self):
        d = {"family": self.family, "amplitude": self.amplitude}
        d.update({"m": self.m} if self.family == "power" else {"mu": self.mu})
        return d


@dataclass(frozen=True)
class SeparablePotential:
    """``W = epsilon * exp(i alpha) * F(X_perp) * G(x3)`` with Schatten exponent ``p``."""

    F: TransverseProfile
    G: LongitudinalProfile
    alpha: float = 0.75 * math.pi
    epsilon: float = 1.0
    p: float = 2.0

    def __post_init__(self):
        check_nonnegative(self.epsilon, "epsilon")
        if not (np.isfinite(self.p) and self.p >= 2):
            raise ValueError(f"Schatten exponent p must be >= 2, got {self.p}")

    @property
    def phase(self):
        return complex(math.cos(self.alpha), math.sin(self.alpha))

    @property
    def sup_norm(self):
        """``||W||_inf``."""
        return self.epsilon * self.F.sup * self.G.sup

    def with_epsilon(self, epsilon):
        return replace(self, epsilon=epsilon)

    def with_alpha(self, alpha):
        return replace(self, alpha=alpha)

    def to_dict(self):
        return {
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "p": self.p,
            "F": self.F.to_dict(),
            "G": self.G.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            F=TransverseProfile(**d["F"]),
            G=LongitudinalProfile(**d["G"]),
            alpha=float(d.get("alpha", 0.75 * math.pi)),
            epsilon=float(d.get("epsilon", 1.0)),
            p=float(d.get("p", 2.0)),
        )


def evaluate_W(pot, x):
    """``W`` at points ``x`` of shape ``(..., 3)``."""
    x = np.asarray(x, dtype=float)
    r = np.hypot(x[..., 0], x[..., 1])
    return pot.epsilon * pot.phase * pot.F(r) * pot.G(x[..., 2])


@dataclass(frozen=True)
class EffectiveW:
    """Radial effective potential ``(epsilon / 2) * (int G) * F(r)``."""

    F: TransverseProfile
    prefactor: float
    G_integral: float = field(default=float("nan"))

    def log_value(self, r):
        if self.prefactor == 0:
            return np.full(np.shape(r), -np.inf)
        return math.log(self.prefactor) + self.F.log_value(r)

    def __call__(self, r):
        return self.prefactor * self.F(r)

    @property
    def sup(self):
        return self.prefactor * self.F.sup

    @property
    def breakpoints(self):
        return self.F.breakpoints

    def scaled(self, c):
        return replace(self, prefactor=self.prefactor * c)


def effective_W(pot):
    """Effective transverse potential of ``pot``; the ``x3`` integral is adaptive."""
    g_int = pot.G.integral(rtol=1e-10)
    return EffectiveW(F=pot.F, prefactor=0.5 * pot.epsilon * g_int, G_integral=g_int)


@dataclass
class AssumptionReport:
    A1: bool
    A2: bool
    A3: bool
    F_in_L1: bool
    A3_constant: float
    details: dict

    def to_dict(self):
        return {
            "A1": self.A1,
            "A2": self.A2,
            "A3": self.A3,
            "F_in_L1": self.F_in_L1,
            "A3_constant": self.A3_constant,
            "details": self.details,
        }


def _a3_fit(pot, r_lo=5.0, r_hi=40.0, n=200):
    """Least-squares decay constant of ``ln W`` against ``<r>^2`` on a tail grid.

    Returns ``(C, holds)``; ``holds`` asks that ``-ln W / <r>^2`` does not fade
    along the tail, which separates gaussian-or-faster decay from the rest.
    """
    F = pot.F
    if F.family == "disk":
        return math.inf, True
    r = np.linspace(r_lo, r_hi, n)
    y = -(F.log_value(r) - math.log(F.amplitude))
    s = 1.0 + r * r
    A = np.vstack([s, np.ones_like(s)]).T
    C = float(np.linalg.lstsq(A, y, rcond=None)[0][0])
    ratio = y / s
    holds = bool(C > 0 and ratio[-1] >= ratio[0] * (1 - 1e-9) and ratio[-1] > 1e-3)
    return C, holds


def check_assumptions(pot):
    """Which of the standing hypotheses hold for ``pot``."""
    F, G = pot.F, pot.G
    F_lp = F.lp_finite(pot.p / 2)
    g_decay = G.decay_exponent
    A1 = bool(F_lp and g_decay > 3)
    A2 = bool(abs(math.sin(pot.alpha)) > 1e-12)
    C, A3 = _a3_fit(pot)
    details = {
        "F_in_Lp_over_2": F_lp,
        "G_decay_exponent": g_decay,
        "G_decay_ok": g_decay > 3,
        "F_strictly_positive": F.family != "disk",
        "alpha_over_pi": pot.alpha / math.pi,
    }
    return AssumptionReport(A1=A1, A2=A2, A3=A3, F_in_L1=bool(F.lp_finite(1)), A3_constant=C, details=details)
