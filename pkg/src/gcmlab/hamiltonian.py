"""Analytic matrix elements and banded assembly of the collective Hamiltonian.

With the oscillator split H = H_osc + V', V' = (A - A_osc) beta^2
+ B beta^3 cos 3gamma + C beta^4, every V' matrix element factorizes into a
closed-form radial integral times an angular cos-3gamma overlap.  The radial
formulas below are the 2D ones; the 5D case uses the same expressions with
n -> nu on index placement and m -> mu + 1/2 substituted on the right-hand
side.  beta^2 and beta^4 couple only equal angular numbers with |dn| <= 2;
beta^3 couples |dm| = 1 with dn in {0,-1,-2,-3} (plus transposes), so the
matrix in the energy-ordered basis is banded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSpec, BasisState, QuantScheme, enumerate_basis, oscillator_energy
from .model import ModelParams

__all__ = [
    "BandedSymmetricMatrix",
    "radial_element",
    "angular_element",
    "assemble",
    "assemble_m_block",
    "optimize_a_osc",
    "TraceMinimumError",
]


@dataclass
class BandedSymmetricMatrix:
    """Lower-triangle packed symmetric band matrix.

    ``band[d, j]`` holds entry (j + d, j) for 0 <= d <= half_bandwidth;
    entries outside the band are exactly zero by construction.  The layout is
    directly consumable by LAPACK's symmetric-band drivers.
    """

    dim: int
    half_bandwidth: int
    band: np.ndarray

    def __post_init__(self):
        expected = (self.half_bandwidth + 1, self.dim)
        if self.band.shape != expected:
            raise ValueError(f"band shape {self.band.shape} != {expected}")
        if not np.isfinite(self.band).all():
            raise ValueError("matrix contains non-finite entries")

    def trace(self) -> float:
        return float(self.band[0].sum())

    def to_dense(self) -> np.ndarray:
        m = np.zeros((self.dim, self.dim))
        for d in range(self.half_bandwidth + 1):
            idx = np.arange(self.dim - d)
            m[idx + d, idx] = self.band[d, : self.dim - d]
            if d > 0:
                m[idx, idx + d] = self.band[d, : self.dim - d]
        return m

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.band[0] * v
        for d in range(1, self.half_bandwidth + 1):
            out[d:] += self.band[d, : self.dim - d] * v[: self.dim - d]
            out[: self.dim - d] += self.band[d, : self.dim - d] * v[d:]
        return out


def _m_eff(scheme: QuantScheme, m_ang: int) -> float:
    return float(m_ang) if scheme.is_2d else m_ang + 0.5


def radial_element(power: int, bra: BasisState, ket: BasisState,
                   spec: BasisSpec) -> float:
    """<bra| beta^power |ket> radial factor, power in {2, 3, 4}.

    Combinations outside the closed-form table (and its transposes) are zero.
    """
    if power not in (2, 3, 4):
        raise ValueError(f"power must be 2, 3 or 4, got {power}")
    k = spec.k
    if power in (2, 4):
        if bra.m_ang != ket.m_ang:
            return 0.0
        if bra.n_rad < ket.n_rad:
            bra, ket = ket, bra
        n, dm = ket.n_rad, bra.n_rad - ket.n_rad
        m = _m_eff(spec.scheme, ket.m_ang)
        t = n + 3.0 * m + 1.0
        if power == 2:
            if dm == 0:
                return (2 * n + 3 * m + 1.0) / k
            if dm == 1:
                return -math.sqrt((n + 1.0) * t) / k
            return 0.0
        if dm == 0:
            return (n * (n - 1.0) + t * (5 * n + 3 * m + 2.0)) / k ** 2
        if dm == 1:
            return -2.0 * (2 * n + 3 * m + 2.0) * math.sqrt(t * (n + 1.0)) / k ** 2
        if dm == 2:
            return math.sqrt((t + 1.0) * t * (n + 2.0) * (n + 1.0)) / k ** 2
        return 0.0
    # beta^3: bra angular number must exceed ket's by one (or transpose)
    if bra.m_ang == ket.m_ang + 1:
        pass
    elif ket.m_ang == bra.m_ang + 1:
        bra, ket = ket, bra
    else:
        return 0.0
    n = ket.n_rad
    m = _m_eff(spec.scheme, ket.m_ang)
    dn = bra.n_rad - n
    c = k ** -1.5
    if dn == 0:
        return c * math.sqrt((n + 3 * m + 3.0) * (n + 3 * m + 2.0) * (n + 3 * m + 1.0))
    if dn == -1:
        return -3.0 * c * math.sqrt(n * (n + 3 * m + 2.0) * (n + 3 * m + 1.0))
    if dn == -2:
        return 3.0 * c * math.sqrt(n * (n - 1.0) * (n + 3 * m + 1.0))
    if dn == -3:
        return -c * math.sqrt(n * (n - 1.0) * (n - 2.0))
    return 0.0


def angular_element(scheme: QuantScheme, m_bra: int, m_ket: int) -> float:
    """<m_bra| cos 3gamma |m_ket> angular overlap; zero unless |dm| = 1."""
    if abs(m_bra - m_ket) != 1:
        return 0.0
    m = min(m_bra, m_ket)
    if scheme is QuantScheme.FIVE_D:
        return (m + 1.0) / math.sqrt((2 * m + 1.0) * (2 * m + 3.0))
    if scheme is QuantScheme.TWO_D_ODD:
        # sin-basis analog of the cos-basis element; the m = 0 state does not
        # exist in the odd sector (sin 0 vanishes identically)
        return 0.5 if m >= 1 else 0.0
    return 1.0 / math.sqrt(2.0) if m == 0 else 0.5


def assemble(params: ModelParams, spec: BasisSpec) -> BandedSymmetricMatrix:
    """Banded matrix of H = H_osc + V' in the energy-ordered oscillator basis.

    Nonzeros are enumerated directly from the selection rules, so assembly is
    O(dim x bandwidth).
    """
    states = enumerate_basis(spec)
    index = {(s.n_rad, s.m_ang): i for i, s in enumerate(states)}
    dim = spec.dimension
    d_a = params.A - spec.a_osc
    b_coef, c_coef = params.B, params.C

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []

    def put(i: int, j: int, v: float) -> None:
        if v != 0.0:
            if i < j:
                i, j = j, i
            rows.append(i)
            cols.append(j)
            vals.append(v)

    for j, ket in enumerate(states):
        n, m = ket.n_rad, ket.m_ang
        diag = oscillator_energy(ket, spec)
        diag += d_a * radial_element(2, ket, ket, spec)
        diag += c_coef * radial_element(4, ket, ket, spec)
        put(j, j, diag)
        for dn, powers in ((1, (2, 4)), (2, (4,))):
            i = index.get((n + dn, m))
            if i is None:
                continue
            bra = states[i]
            v = 0.0
            if 2 in powers and d_a != 0.0:
                v += d_a * radial_element(2, bra, ket, spec)
            v += c_coef * radial_element(4, bra, ket, spec)
            put(i, j, v)
        if b_coef != 0.0:
            ang = angular_element(spec.scheme, m + 1, m)
            if ang != 0.0:
                for dn in (0, -1, -2, -3):
                    if n + dn < 0:
                        continue
                    i = index.get((n + dn, m + 1))
                    if i is None:
                        continue
                    bra = states[i]
                    put(i, j, b_coef * ang * radial_element(3, bra, ket, spec))

    rows_a = np.asarray(rows)
    cols_a = np.asarray(cols)
    hbw = int((rows_a - cols_a).max()) if len(rows) else 0
    band = np.zeros((hbw + 1, dim))
    band[rows_a - cols_a, cols_a] = np.asarray(vals)
    return BandedSymmetricMatrix(dim=dim, half_bandwidth=hbw, band=band)


def assemble_m_block(params: ModelParams, spec: BasisSpec, m_ang: int,
                     n_count: int) -> BandedSymmetricMatrix:
    """Single angular block (fixed m) of the B = 0 Hamiltonian.

    With B = 0 nothing couples different angular numbers, so each block is a
    pentadiagonal radial problem; useful for integrable-limit studies.
    """
    if params.B != 0.0:
        raise ValueError("m-block assembly is only valid at B = 0")
    d_a = params.A - spec.a_osc
    band = np.zeros((3, n_count))
    for n in range(n_count):
        ket = BasisState(n, m_ang)
        band[0, n] = (oscillator_energy(ket, spec)
                      + d_a * radial_element(2, ket, ket, spec)
                      + params.C * radial_element(4, ket, ket, spec))
        if n + 1 < n_count:
            bra = BasisState(n + 1, m_ang)
            band[1, n] = (d_a * radial_element(2, bra, ket, spec)
                          + params.C * radial_element(4, bra, ket, spec))
        if n + 2 < n_count:
            band[2, n] = params.C * radial_element(4, BasisState(n + 2, m_ang), ket, spec)
    return BandedSymmetricMatrix(dim=n_count, half_bandwidth=2, band=band)


class TraceMinimumError(RuntimeError):
    """Raised when the basis-trace has no interior minimum in the bracket."""


def _trace_of_a(a_osc: float, params: ModelParams, spec: BasisSpec,
                s1: float, s2: float) -> float:
    # trace from diagonal elements only; S1 = sum(2n+3M+1), S2 = sum of the
    # beta^4 diagonal coefficients over the enumerated basis
    hb, kk = spec.hbar, spec.K
    omega = math.sqrt(2.0 * a_osc / kk)
    k = math.sqrt(2.0 * a_osc * kk) / hb
    return hb * omega * s1 + (params.A - a_osc) / k * s1 + params.C / k ** 2 * s2


def optimize_a_osc(params: ModelParams, spec: BasisSpec, c_shift: float = 0.6,
                   rel_tol: float = 1e-4) -> float:
    """Oscillator stiffness from the minimal-trace rule, deflated by c_shift.

    Golden-section search on log a_osc locates the stiffness minimizing the
    trace of H in the truncated basis; the returned value is c_shift times
    that minimizer, since the best-converging stiffness sits below the trace
    minimum.  c_shift = 1 returns the raw trace minimizer.
    """
    if not 0.0 < c_shift <= 1.0:
        raise ValueError(f"c_shift must be in (0, 1], got {c_shift}")
    states = enumerate_basis(spec)
    s1 = s2 = 0.0
    for st in states:
        n = st.n_rad
        m = _m_eff(spec.scheme, st.m_ang)
        t = n + 3.0 * m + 1.0
        s1 += 2 * n + 3 * m + 1.0
        s2 += n * (n - 1.0) + t * (5 * n + 3 * m + 2.0)

    a_ref = abs(params.A) + abs(params.C)
    lo, hi = math.log(1e-6 * a_ref), math.log(1e6 * a_ref)

    def f(loga: float) -> float:
        return _trace_of_a(math.exp(loga), params, spec, s1, s2)

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(200):
        if hi - lo < rel_tol:
            break
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
    loga = 0.5 * (lo + hi)
    edge = math.log(1e6 * a_ref) - math.log(1e-6 * a_ref)
    if min(loga - math.log(1e-6 * a_ref), math.log(1e6 * a_ref) - loga) < 1e-3 * edge:
        raise TraceMinimumError(
            "basis trace has no interior minimum; Hamiltonian parameters "
            "appear pathological for an oscillator expansion")
    return c_shift * math.exp(loga)
