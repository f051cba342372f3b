"""Harmonic-oscillator eigenbases for the 2D and 5D quantization schemes.

Basis functions factorize into radial and angular parts,

    psi_nm(beta, gamma)  = R2D_nm(beta)  * Phi2D_m(gamma)     (2D even/odd)
    psi_vm(beta, gamma)  = R5D_vm(beta)  * Phi5D_m(gamma)     (5D)

with generalized-Laguerre radial profiles and trigonometric (2D) or
Legendre (5D) angular profiles in cos 3gamma.  Only angular quantum numbers
that are multiples of 3 appear, which hard-wires the three-fold symmetry of
the collective potential into every basis function.

Radial profiles are evaluated through an upward three-term recurrence on the
*orthonormalized* functions, keeping every intermediate O(1); the
normalization prefactor enters through its logarithm, so large quantum
numbers neither overflow nor lose the leading digits.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "QuantScheme",
    "BasisState",
    "BasisSpec",
    "oscillator_energy",
    "enumerate_basis",
    "radial_wavefunction",
    "radial_block",
    "angular_wavefunction",
    "angular_block",
    "wavefunction",
]


class QuantScheme(enum.Enum):
    TWO_D_EVEN = "2d-even"
    TWO_D_ODD = "2d-odd"
    FIVE_D = "5d"

    @classmethod
    def from_string(cls, s: str) -> "QuantScheme":
        for scheme in cls:
            if scheme.value == s:
                return scheme
        raise ValueError(f"unknown quantization scheme {s!r}; "
                         f"expected one of {[x.value for x in cls]}")

    @property
    def is_2d(self) -> bool:
        return self is not QuantScheme.FIVE_D


@dataclass(frozen=True, order=True)
class BasisState:
    """One oscillator basis state: radial quantum number and angular index.

    ``m_ang`` counts multiples of 3 of the bare angular momentum in the 2D
    case, and the O(5) seniority-type label in the 5D case.
    """

    n_rad: int
    m_ang: int

    def __post_init__(self):
        if self.n_rad < 0 or self.m_ang < 0:
            raise ValueError(f"quantum numbers must be nonnegative: {self}")


@dataclass(frozen=True)
class BasisSpec:
    """Oscillator basis specification: scheme, stiffness, truncation.

    Derived scales:
        k     = sqrt(2 a_osc K) / hbar   (inverse length^2 of the basis)
        Omega = sqrt(2 a_osc / K)        (oscillator frequency)
    """

    scheme: QuantScheme
    a_osc: float
    K: float
    hbar: float
    dimension: int

    def __post_init__(self):
        if not self.a_osc > 0:
            raise ValueError(f"a_osc must be positive, got {self.a_osc}")
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if not (self.K > 0 and self.hbar > 0):
            raise ValueError("K and hbar must be positive")

    @property
    def k(self) -> float:
        return math.sqrt(2.0 * self.a_osc * self.K) / self.hbar

    @property
    def omega(self) -> float:
        return math.sqrt(2.0 * self.a_osc / self.K)

    def with_dimension(self, dimension: int) -> "BasisSpec":
        return BasisSpec(self.scheme, self.a_osc, self.K, self.hbar, dimension)

    def with_a_osc(self, a_osc: float) -> "BasisSpec":
        return BasisSpec(self.scheme, a_osc, self.K, self.hbar, self.dimension)


def _quanta(state: BasisState) -> int:
    return 2 * state.n_rad + 3 * state.m_ang


def oscillator_energy(state: BasisState, spec: BasisSpec) -> float:
    """hbar Omega (2n + 3m + 1) in 2D, hbar Omega (2nu + 3mu + 5/2) in 5D."""
    base = 1.0 if spec.scheme.is_2d else 2.5
    return spec.hbar * spec.omega * (_quanta(state) + base)


def enumerate_basis(spec: BasisSpec) -> list[BasisState]:
    """First ``dimension`` states ordered by oscillator energy, then m, then n.

    The odd 2D sector excludes m = 0 (sin 3m gamma vanishes identically).
    The ordering is a fixed total order, so a larger basis always extends a
    smaller one (prefix property).
    """
    m_min = 1 if spec.scheme is QuantScheme.TWO_D_ODD else 0
    states: list[BasisState] = []
    q_cap = 4
    while True:
        states.clear()
        for q in range(q_cap + 1):
            for m in range(m_min, q // 3 + 1):
                rem = q - 3 * m
                if rem % 2 == 0:
                    states.append(BasisState(rem // 2, m))
        if len(states) >= spec.dimension:
            break
        q_cap *= 2
    states.sort(key=lambda s: (_quanta(s), s.m_ang, s.n_rad))
    return states[: spec.dimension]


def _weighted_laguerre(n_max: int, alpha: float, x_pow_half: float,
                       x: np.ndarray) -> np.ndarray:
    """Orthonormalized Laguerre ladder u_n(x) for n = 0..n_max.

    u_n(x) = sqrt(n! / Gamma(n+alpha+1)) * L_n^alpha(x) * x^x_pow_half * e^(-x/2)

    evaluated by the upward recurrence obtained from the classical Laguerre
    one after absorbing the norm ratios, which keeps all terms O(1).
    Returns an array of shape (n_max + 1,) + x.shape.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    with np.errstate(divide="ignore"):
        logw = np.where(x > 0.0, x_pow_half * np.log(np.where(x > 0, x, 1.0)), 0.0)
    w = np.exp(logw - 0.5 * x - 0.5 * gammaln(alpha + 1.0))
    if x_pow_half > 0:
        w = np.where(x > 0.0, w, 0.0)
    out[0] = w
    if n_max >= 1:
        out[1] = (alpha + 1.0 - x) / math.sqrt(alpha + 1.0) * w
    for n in range(1, n_max):
        a_n = (2 * n + alpha + 1.0 - x) / math.sqrt((n + 1.0) * (n + 1.0 + alpha))
        b_n = math.sqrt(n * (n + alpha) / ((n + 1.0) * (n + 1.0 + alpha)))
        out[n + 1] = a_n * out[n] - b_n * out[n - 1]
    return out


def radial_block(spec: BasisSpec, m_ang: int, n_max: int, beta) -> np.ndarray:
    """Radial profiles R_{n, m_ang}(beta) for all n = 0..n_max at once."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    k = spec.k
    x = k * beta * beta
    if spec.scheme.is_2d:
        u = _weighted_laguerre(n_max, 3.0 * m_ang, 1.5 * m_ang, x)
        return math.sqrt(2.0 * k) * u
    u = _weighted_laguerre(n_max, 3.0 * m_ang + 1.5, 1.5 * m_ang, x)
    return math.sqrt(2.0) * k ** 1.25 * u


def radial_wavefunction(state: BasisState, spec: BasisSpec, beta):
    """Normalized radial profile of one basis state.

    Orthonormal under the measure beta dbeta (2D) or beta^4 dbeta (5D).
    """
    vals = radial_block(spec, state.m_ang, state.n_rad, beta)[state.n_rad]
    return vals if np.ndim(beta) else float(vals[0])


def _legendre_ladder(m_max: int, z: np.ndarray) -> np.ndarray:
    p = np.empty((m_max + 1,) + z.shape)
    p[0] = 1.0
    if m_max >= 1:
        p[1] = z
    for m in range(1, m_max):
        p[m + 1] = ((2 * m + 1) * z * p[m] - m * p[m - 1]) / (m + 1.0)
    return p


def angular_block(scheme: QuantScheme, m_max: int, gamma) -> np.ndarray:
    """Angular profiles Phi_m(gamma) for all m = 0..m_max (row per m)."""
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    if scheme is QuantScheme.FIVE_D:
        p = _legendre_ladder(m_max, np.cos(3.0 * gamma))
        norm = np.sqrt((2.0 * np.arange(m_max + 1) + 1.0) / 4.0)
        return p * norm[:, None]
    ms = np.arange(m_max + 1)[:, None]
    if scheme is QuantScheme.TWO_D_ODD:
        return np.sin(3.0 * ms * gamma[None, :]) / math.sqrt(math.pi)
    out = np.cos(3.0 * ms * gamma[None, :]) / math.sqrt(math.pi)
    out[0] = 1.0 / math.sqrt(2.0 * math.pi)
    return out


def angular_wavefunction(state: BasisState, scheme: QuantScheme, gamma):
    vals = angular_block(scheme, state.m_ang, gamma)[state.m_ang]
    return vals if np.ndim(gamma) else float(vals[0])


def wavefunction(state: BasisState, spec: BasisSpec, beta, gamma):
    """Full basis function: product of radial and angular profiles."""
    return (radial_wavefunction(state, spec, beta)
            * angular_wavefunction(state, spec.scheme, gamma))
