"""Hamiltonian parameters, potential surface and shape-coordinate geometry.

The potential is the quartic surface

    V(beta, gamma) = A beta^2 + B beta^3 cos(3 gamma) + C beta^4

in polar deformation coordinates, or equivalently, with
(x, y) = (beta cos gamma, beta sin gamma),

    V(x, y) = A (x^2+y^2) + B (x^3 - 3 x y^2) + C (x^2+y^2)^2.

All quantities are dimensionless model units.  The classicality constant
kappa = hbar^2 / K sets the density of quantum states on a fixed classical
surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelParams",
    "ShapeCoords",
    "CartesianCoords",
    "Extremum",
    "potential",
    "potential_xy",
    "potential_gradient_xy",
    "potential_hessian_xy",
    "to_polar",
    "to_cartesian",
    "potential_extrema",
    "accessible_boundary",
    "rescale_to_canonical",
    "CanonicalScaling",
]


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the collective Hamiltonian H = p^2/(2K) + V.

    A, B, C are the quadratic/cubic/quartic potential coefficients (C > 0 so
    the spectrum is bounded below and discrete), K is the mass parameter and
    hbar the dimensionless Planck constant.  kappa = hbar^2/K is derived.
    """

    A: float
    B: float
    C: float
    K: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.C < 0:
            raise ValueError(f"C must be nonnegative (confining potential), got {self.C}")
        if self.C == 0 and not (self.A > 0 and self.B == 0):
            raise ValueError("C = 0 is only confining in the pure-oscillator "
                             "limit (A > 0, B = 0)")
        if not self.K > 0:
            raise ValueError(f"K must be positive, got {self.K}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @property
    def kappa(self) -> float:
        return self.hbar ** 2 / self.K

    def as_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C, "K": self.K,
                "hbar": self.hbar, "kappa": self.kappa}


@dataclass(frozen=True)
class ShapeCoords:
    """Polar shape coordinates: deformation radius beta >= 0 and angle gamma."""

    beta: float
    gamma: float

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")


@dataclass(frozen=True)
class CartesianCoords:
    x: float
    y: float


def to_cartesian(c: ShapeCoords) -> CartesianCoords:
    return CartesianCoords(c.beta * math.cos(c.gamma), c.beta * math.sin(c.gamma))


def to_polar(c: CartesianCoords) -> ShapeCoords:
    """Inverse of :func:`to_cartesian`; gamma = 0 at the origin by convention."""
    beta = math.hypot(c.x, c.y)
    gamma = math.atan2(c.y, c.x) if beta > 0 else 0.0
    return ShapeCoords(beta, gamma)


def potential(params: ModelParams, c: ShapeCoords) -> float:
    """V(beta, gamma) = A beta^2 + B beta^3 cos 3gamma + C beta^4."""
    b2 = c.beta * c.beta
    return params.A * b2 + params.B * b2 * c.beta * math.cos(3.0 * c.gamma) + params.C * b2 * b2


def potential_xy(params: ModelParams, x, y):
    """Vectorized potential in Cartesian coordinates."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    b2 = x * x + y * y
    return params.A * b2 + params.B * (x ** 3 - 3.0 * x * y * y) + params.C * b2 * b2


def potential_gradient_xy(params: ModelParams, x: float, y: float) -> tuple[float, float]:
    b2 = x * x + y * y
    gx = 2.0 * params.A * x + 3.0 * params.B * (x * x - y * y) + 4.0 * params.C * x * b2
    gy = 2.0 * params.A * y - 6.0 * params.B * x * y + 4.0 * params.C * y * b2
    return gx, gy


def potential_hessian_xy(params: ModelParams, x: float, y: float) -> np.ndarray:
    a, b, c = params.A, params.B, params.C
    vxx = 2.0 * a + 6.0 * b * x + 4.0 * c * (3.0 * x * x + y * y)
    vyy = 2.0 * a - 6.0 * b * x + 4.0 * c * (x * x + 3.0 * y * y)
    vxy = -6.0 * b * y + 8.0 * c * x * y
    return np.array([[vxx, vxy], [vxy, vyy]])


@dataclass(frozen=True)
class Extremum:
    coords: ShapeCoords
    energy: float
    kind: str  # "min" | "max" | "saddle"


def _classify(params: ModelParams, x: float, y: float) -> str:
    eigs = np.linalg.eigvalsh(potential_hessian_xy(params, x, y))
    scale = abs(params.A) + abs(params.B) + abs(params.C)
    tol = 1e-9 * max(scale, 1.0)
    pos = eigs > tol
    neg = eigs < -tol
    if neg.any() and pos.any():
        return "saddle"
    if pos.any() and not neg.any():
        return "min"
    if neg.any() and not pos.any():
        return "max"
    # fully degenerate Hessian (e.g. beta=0 with A=0): probe a small circle
    r = 1e-4 * max(1.0, scale)
    angles = np.linspace(0.0, 2.0 * np.pi, 12, endpoint=False)
    v0 = potential_xy(params, x, y)
    dv = potential_xy(params, x + r * np.cos(angles), y + r * np.sin(angles)) - v0
    if (dv > 0).all():
        return "min"
    if (dv < 0).all():
        return "max"
    return "saddle"


def _polish_radial(params: ModelParams, beta: float, cos3g: float) -> float:
    # one Newton step on dV/dbeta = 2A b + 3B b^2 cos3g + 4C b^3
    a, b, c = params.A, params.B * cos3g, params.C
    for _ in range(2):
        f = 2 * a * beta + 3 * b * beta ** 2 + 4 * c * beta ** 3
        fp = 2 * a + 6 * b * beta + 12 * c * beta ** 2
        if fp == 0:
            break
        beta -= f / fp
    return beta


def potential_extrema(params: ModelParams) -> list[Extremum]:
    """Critical points of V along the gamma = 0 and gamma = pi/3 rays.

    Radial critical points solve 2A b + 3B c3 b^2 + 4C b^3 = 0 with
    c3 = cos 3gamma = +/-1; the representative on each ray is returned together
    with beta = 0.  Classification comes from the Cartesian 2x2 Hessian.
    """
    out = [Extremum(ShapeCoords(0.0, 0.0), 0.0, _classify(params, 0.0, 0.0))]
    if params.C == 0:
        return out  # pure oscillator: the origin is the only critical point
    for gamma, c3 in ((0.0, 1.0), (math.pi / 3.0, -1.0)):
        # quadratic in beta after dividing the radial equation by beta
        a2, a1, a0 = 4.0 * params.C, 3.0 * params.B * c3, 2.0 * params.A
        disc = a1 * a1 - 4.0 * a2 * a0
        if disc < 0:
            continue
        sq = math.sqrt(disc)
        for root in ((-a1 + sq) / (2 * a2), (-a1 - sq) / (2 * a2)):
            if root <= 0:
                continue
            beta = _polish_radial(params, root, c3)
            if beta <= 0:
                continue
            pt = to_cartesian(ShapeCoords(beta, gamma))
            e = potential(params, ShapeCoords(beta, gamma))
            out.append(Extremum(ShapeCoords(beta, gamma), e, _classify(params, pt.x, pt.y)))
    return out


def accessible_boundary(params: ModelParams, energy: float, gamma: float) -> list[tuple[float, float]]:
    """Solve V(beta, gamma) <= energy for beta >= 0 at fixed gamma.

    Returns 0, 1 or 2 disjoint [lo, hi] intervals.  A single-point interval is
    returned where the energy just touches a minimum of V along the ray.
    """
    c3 = math.cos(3.0 * gamma)
    # q(b) = C b^4 + B c3 b^3 + A b^2 - E  <= 0
    coeffs = [params.C, params.B * c3, params.A, 0.0, -energy]
    roots = np.roots(coeffs)
    real = []
    scale = max(1.0, abs(energy), abs(params.A), abs(params.B), params.C)
    for r in roots:
        if abs(r.imag) < 1e-9 * max(1.0, abs(r.real)):
            b = r.real
            # Newton polish on the quartic
            for _ in range(2):
                q = ((params.C * b + params.B * c3) * b + params.A) * b * b - energy
                qp = ((4 * params.C * b + 3 * params.B * c3) * b + 2 * params.A) * b
                if qp != 0:
                    b -= q / qp
            if b >= -1e-12:
                real.append(max(b, 0.0))
    real = sorted(set(np.round(real, 13)))

    def q_of(b):
        return ((params.C * b + params.B * c3) * b + params.A) * b * b - energy

    # build candidate breakpoints over [0, inf); q > 0 at large beta since C > 0
    pts = [0.0] + [b for b in real if b > 1e-13]
    intervals: list[tuple[float, float]] = []
    lo = None
    for i, p in enumerate(pts):
        nxt = pts[i + 1] if i + 1 < len(pts) else p + max(1.0, p)
        mid = 0.5 * (p + nxt)
        inside = q_of(mid) <= 0
        at_root = q_of(p) <= 1e-12 * scale
        if inside:
            if lo is None:
                lo = p if (at_root or p == 0.0) else p
        else:
            if lo is not None:
                intervals.append((lo, p))
                lo = None
            elif at_root and p > 0 and abs(q_of(p)) <= 1e-12 * scale:
                # isolated touching point (energy at a local minimum of V)
                if i > 0 and q_of(0.5 * (pts[i - 1] + p)) > 0:
                    intervals.append((p, p))
    if lo is not None:
        # q <= 0 cannot persist to infinity for C > 0; close at the last root
        intervals.append((lo, pts[-1]))
    return intervals


@dataclass(frozen=True)
class CanonicalScaling:
    """Scale factors mapping canonical-form results back to the original units.

    energy_scale: E_original = energy_scale * E_canonical
    length_scale: beta_original = length_scale * beta_canonical
    """

    energy_scale: float
    length_scale: float
    gamma_shift: float = 0.0


def rescale_to_canonical(params: ModelParams) -> tuple[ModelParams, CanonicalScaling]:
    """Rescale to (A, C) = (+/-1, +1), K = 1, B >= 0.

    The sign of B is normalized through the gamma -> gamma + pi/3 symmetry
    (recorded in ``gamma_shift``).  kappa transforms as
    kappa' = kappa * C^2 / |A|^3; eigenvalues map back through energy_scale.
    A = 0 is passed through with only the C and K normalization.
    """
    a, b, c, k, hb = params.A, params.B, params.C, params.K, params.hbar
    if c == 0.0:
        sigma2, eps = 1.0, abs(a)  # pure oscillator: normalize A only
    elif a != 0.0:
        sigma2 = abs(a) / c
        eps = a * a / c
    else:
        sigma2 = c ** (-1.0 / 3.0)  # only C -> 1
        eps = c * sigma2 ** 2
    sigma = math.sqrt(sigma2)
    a_new = a * sigma2 / eps
    b_new = b * sigma2 * sigma / eps
    c_new = c * sigma2 * sigma2 / eps
    gamma_shift = 0.0
    if b_new < 0:
        b_new = -b_new
        gamma_shift = math.pi / 3.0
    kappa_new = params.kappa / (sigma2 * eps)
    out = ModelParams(A=a_new, B=b_new, C=c_new, K=1.0, hbar=math.sqrt(kappa_new))
    return out, CanonicalScaling(energy_scale=eps, length_scale=sigma, gamma_shift=gamma_shift)
