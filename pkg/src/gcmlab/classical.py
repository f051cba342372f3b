"""Classical limit: trajectory integration, SALI chaos detection, f_reg.

The classical Hamiltonian shared by both quantization schemes is

    H = (px^2 + py^2) / (2K) + V(x, y)

with the quartic collective potential.  Trajectories and the tangent flow are
integrated together by an adaptive embedded Runge-Kutta 7(8) pair (Fehlberg
coefficients, eighth-order solution propagated), compiled with numba.  Chaos
is detected through the smaller alignment index (SALI) of two deviation
vectors, renormalized on a fixed cadence; exponential collapse of the index
signals chaos, while regular trajectories keep it of order one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from .model import ModelParams

__all__ = [
    "PhasePoint",
    "TrajectoryResult",
    "RegularFractionPoint",
    "hamiltonian_value",
    "integrate",
    "sali_classify",
    "classify_batch",
    "sample_energy_shell",
    "regular_fraction",
    "freg_map",
]

# Fehlberg 7(8) tableau; the 8th-order weights B8 propagate the solution and
# the error estimate is 41/840 h (k0 + k10 - k11 - k12).
_A = np.zeros((13, 13))
_A[1, 0] = 2 / 27
_A[2, :2] = [1 / 36, 1 / 12]
_A[3, 0] = 1 / 24
_A[3, 2] = 1 / 8
_A[4, 0] = 5 / 12
_A[4, 2] = -25 / 16
_A[4, 3] = 25 / 16
_A[5, 0] = 1 / 20
_A[5, 3] = 1 / 4
_A[5, 4] = 1 / 5
_A[6, 0] = -25 / 108
_A[6, 3] = 125 / 108
_A[6, 4] = -65 / 27
_A[6, 5] = 125 / 54
_A[7, 0] = 31 / 300
_A[7, 4] = 61 / 225
_A[7, 5] = -2 / 9
_A[7, 6] = 13 / 900
_A[8, 0] = 2.0
_A[8, 3] = -53 / 6
_A[8, 4] = 704 / 45
_A[8, 5] = -107 / 9
_A[8, 6] = 67 / 90
_A[8, 7] = 3.0
_A[9, 0] = -91 / 108
_A[9, 3] = 23 / 108
_A[9, 4] = -976 / 135
_A[9, 5] = 311 / 54
_A[9, 6] = -19 / 60
_A[9, 7] = 17 / 6
_A[9, 8] = -1 / 12
_A[10, 0] = 2383 / 4100
_A[10, 3] = -341 / 164
_A[10, 4] = 4496 / 1025
_A[10, 5] = -301 / 82
_A[10, 6] = 2133 / 4100
_A[10, 7] = 45 / 82
_A[10, 8] = 45 / 164
_A[10, 9] = 18 / 41
_A[11, 0] = 3 / 205
_A[11, 5] = -6 / 41
_A[11, 6] = -3 / 205
_A[11, 7] = -3 / 41
_A[11, 8] = 3 / 41
_A[11, 9] = 6 / 41
_A[12, 0] = -1777 / 4100
_A[12, 3] = -341 / 164
_A[12, 4] = 4496 / 1025
_A[12, 5] = -289 / 82
_A[12, 6] = 2193 / 4100
_A[12, 7] = 51 / 82
_A[12, 8] = 33 / 164
_A[12, 9] = 12 / 41
_A[12, 11] = 1.0
_B8 = np.zeros(13)
_B8[5] = 34 / 105
_B8[6] = 9 / 35
_B8[7] = 9 / 35
_B8[8] = 9 / 280
_B8[9] = 9 / 280
_B8[11] = 41 / 840
_B8[12] = 41 / 840


@dataclass(frozen=True)
class PhasePoint:
    x: float
    y: float
    px: float
    py: float

    def __post_init__(self):
        if not all(map(math.isfinite, (self.x, self.y, self.px, self.py))):
            raise ValueError("phase-space coordinates must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.px, self.py])


@dataclass(frozen=True)
class TrajectoryResult:
    classification: str  # "regular" | "chaotic" | "undecided"
    sali: float
    t_reached: float
    energy_drift: float


@dataclass(frozen=True)
class RegularFractionPoint:
    energy: float
    f_reg: float
    sigma: float
    n_regular: int
    n_chaotic: int
    n_undecided: int

    @property
    def n_total(self) -> int:
        return self.n_regular + self.n_chaotic + self.n_undecided


def hamiltonian_value(p: PhasePoint, params: ModelParams) -> float:
    b2 = p.x * p.x + p.y * p.y
    v = params.A * b2 + params.B * (p.x ** 3 - 3.0 * p.x * p.y * p.y) + params.C * b2 * b2
    return (p.px * p.px + p.py * p.py) / (2.0 * params.K) + v


@njit(cache=True)
def _rhs(u, out, a, b, c, k, ndev):
    x, y = u[0], u[1]
    out[0] = u[2] / k
    out[1] = u[3] / k
    b2 = x * x + y * y
    out[2] = -(2.0 * a * x + 3.0 * b * (x * x - y * y) + 4.0 * c * x * b2)
    out[3] = -(2.0 * a * y - 6.0 * b * x * y + 4.0 * c * y * b2)
    if ndev > 0:
        vxx = 2.0 * a + 6.0 * b * x + 4.0 * c * (3.0 * x * x + y * y)
        vyy = 2.0 * a - 6.0 * b * x + 4.0 * c * (x * x + 3.0 * y * y)
        vxy = -6.0 * b * y + 8.0 * c * x * y
        for j in range(ndev):
            o = 4 + 4 * j
            out[o + 0] = u[o + 2] / k
            out[o + 1] = u[o + 3] / k
            out[o + 2] = -(vxx * u[o + 0] + vxy * u[o + 1])
            out[o + 3] = -(vxy * u[o + 0] + vyy * u[o + 1])


@njit(cache=True)
def _try_step(u, h, a, b, c, k, ndev, at, b8, rtol, atol, work, ks):
    n = u.shape[0]
    for i in range(13):
        for m in range(n):
            acc = 0.0
            for j in range(i):
                acc += at[i, j] * ks[j, m]
            work[m] = u[m] + h * acc
        _rhs(work, ks[i], a, b, c, k, ndev)
    err = 0.0
    for m in range(n):
        acc = 0.0
        for i in range(13):
            acc += b8[i] * ks[i, m]
        work[m] = u[m] + h * acc
        e = h * (ks[0, m] + ks[10, m] - ks[11, m] - ks[12, m]) * 41.0 / 840.0
        sc = atol + rtol * abs(u[m])
        q = e / sc
        err += q * q
    return math.sqrt(err / n)


@njit(cache=True)
def _advance(u, t, t_end, h, a, b, c, k, ndev, at, b8, rtol, atol):
    """Adaptive stepping from t to t_end in place; returns (t, h, ok)."""
    n = u.shape[0]
    work = np.empty(n)
    ks = np.empty((13, n))
    h_min = 1e-14 * max(1.0, abs(t_end))
    while t < t_end:
        hh = min(h, t_end - t)
        err = _try_step(u, hh, a, b, c, k, ndev, at, b8, rtol, atol, work, ks)
        if err <= 1.0:
            t += hh
            for m in range(n):
                u[m] = work[m]
            fac = 5.0 if err == 0.0 else 0.9 * err ** -0.125
            h = hh * min(5.0, max(0.2, fac))
        else:
            h = hh * max(0.2, 0.9 * err ** -0.125)
            if h < h_min:
                return t, h, False
    return t, h, True


@njit(cache=True)
def _energy(u, a, b, c, k):
    x, y = u[0], u[1]
    b2 = x * x + y * y
    v = a * b2 + b * (x ** 3 - 3.0 * x * y * y) + c * b2 * b2
    return (u[2] * u[2] + u[3] * u[3]) / (2.0 * k) + v


@njit(cache=True)
def _energy_ref(u, a, b, c, k):
    x, y = u[0], u[1]
    b2 = x * x + y * y
    v = a * b2 + b * (x ** 3 - 3.0 * x * y * y) + c * b2 * b2
    t = (u[2] * u[2] + u[3] * u[3]) / (2.0 * k)
    return max(abs(t + v), abs(t) + abs(v), 1e-12)


@njit(cache=True)
def _sali_run(q0, a, b, c, k, t_max, renorm_dt, sali_chaos, rtol, atol, at, b8):
    """Returns (sali, t_reached, relative_drift, ok)."""
    u = np.zeros(12)
    for m in range(4):
        u[m] = q0[m]
    u[4] = 1.0  # dev 1 along x
    u[9] = 1.0  # dev 2 along y
    e0 = _energy(u, a, b, c, k)
    e_ref = _energy_ref(u, a, b, c, k)
    drift = 0.0
    sali = math.sqrt(2.0)
    t = 0.0
    h = 1e-3
    while t < t_max - 1e-12:
        t, h, ok = _advance(u, t, min(t + renorm_dt, t_max), h,
                            a, b, c, k, 2, at, b8, rtol, atol)
        if not ok:
            return sali, t, drift, False
        n1 = math.sqrt(u[4] ** 2 + u[5] ** 2 + u[6] ** 2 + u[7] ** 2)
        n2 = math.sqrt(u[8] ** 2 + u[9] ** 2 + u[10] ** 2 + u[11] ** 2)
        if n1 == 0.0 or n2 == 0.0:
            return 0.0, t, drift, True
        for m in range(4):
            u[4 + m] /= n1
            u[8 + m] /= n2
        sp = 0.0
        sm = 0.0
        for m in range(4):
            sp += (u[4 + m] + u[8 + m]) ** 2
            sm += (u[4 + m] - u[8 + m]) ** 2
        sali = min(math.sqrt(sp), math.sqrt(sm))
        d = abs(_energy(u, a, b, c, k) - e0) / e_ref
        if d > drift:
            drift = d
        if sali < sali_chaos:
            return sali, t, drift, True
    return sali, t_max, drift, True


@njit(cache=True, parallel=True)
def _sali_batch(points, a, b, c, k, t_max, renorm_dt, sali_chaos, rtol, atol, at, b8):
    n = points.shape[0]
    out = np.empty((n, 4))
    for i in prange(n):
        sali, t, drift, ok = _sali_run(points[i], a, b, c, k, t_max, renorm_dt,
                                       sali_chaos, rtol, atol, at, b8)
        out[i, 0] = sali
        out[i, 1] = t
        out[i, 2] = drift
        out[i, 3] = 1.0 if ok else 0.0
    return out


@njit(cache=True)
def _trajectory(q0, a, b, c, k, t_max, n_samples, rtol, atol, at, b8):
    u = q0.copy()
    e0 = _energy(u, a, b, c, k)
    e_ref = _energy_ref(u, a, b, c, k)
    samples = np.empty((n_samples + 1, 5))
    samples[0, 0] = 0.0
    samples[0, 1:] = u
    drift = 0.0
    t = 0.0
    h = 1e-3
    ok = True
    for i in range(1, n_samples + 1):
        t_target = t_max * i / n_samples
        t, h, ok = _advance(u, t, t_target, h, a, b, c, k, 0, at, b8, rtol, atol)
        samples[i, 0] = t
        samples[i, 1:] = u
        d = abs(_energy(u, a, b, c, k) - e0) / e_ref
        if d > drift:
            drift = d
        if not ok:
            return samples[: i + 1], drift, False
    return samples, drift, True


def integrate(p0: PhasePoint, params: ModelParams, t_max: float,
              tol: float = 1e-9, rtol: float = 3e-14, atol: float = 3e-14,
              n_samples: int = 1000):
    """Integrate Hamilton's equations; returns (samples, drift, ok).

    ``samples`` rows are (t, x, y, px, py) on a uniform grid.  The run is
    marked failed (ok = False) when the step size underflows or the relative
    energy drift exceeds ``tol``.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    samples, drift, ok = _trajectory(p0.as_array(), params.A, params.B, params.C,
                                     params.K, t_max, n_samples, rtol, atol, _A, _B8)
    return samples, float(drift), bool(ok) and drift <= tol


def sali_classify(p0: PhasePoint, params: ModelParams, t_max: float = 1e4,
                  sali_chaotic: float = 1e-8, sali_regular: float = 1e-4,
                  renorm_interval: float = 1.0, rtol: float = 3e-14,
                  atol: float = 3e-14, drift_tol: float = 1e-9) -> TrajectoryResult:
    """Classify one trajectory as regular/chaotic/undecided via SALI.

    Two deviation vectors are co-integrated through the tangent flow and
    renormalized every ``renorm_interval``; SALI below ``sali_chaotic``
    before t_max means chaotic, SALI still above ``sali_regular`` at t_max
    means regular, anything else (including integration failure or excess
    energy drift) is undecided.
    """
    sali, t, drift, ok = _sali_run(p0.as_array(), params.A, params.B, params.C,
                                   params.K, t_max, renorm_interval, sali_chaotic,
                                   rtol, atol, _A, _B8)
    return _verdict(sali, t, drift, ok, t_max, sali_chaotic, sali_regular, drift_tol)


def _verdict(sali, t, drift, ok, t_max, sali_chaotic, sali_regular, drift_tol):
    if not ok or drift > drift_tol:
        return TrajectoryResult("undecided", float(sali), float(t), float(drift))
    if sali < sali_chaotic:
        return TrajectoryResult("chaotic", float(sali), float(t), float(drift))
    if sali >= sali_regular:
        return TrajectoryResult("regular", float(sali), float(t), float(drift))
    return TrajectoryResult("undecided", float(sali), float(t), float(drift))


def classify_batch(points: np.ndarray, params: ModelParams, t_max: float = 1e4,
                   sali_chaotic: float = 1e-8, sali_regular: float = 1e-4,
                   renorm_interval: float = 1.0, rtol: float = 3e-14,
                   atol: float = 3e-14, drift_tol: float = 1e-9) -> list[TrajectoryResult]:
    """Vector version of :func:`sali_classify` (parallel across trajectories)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    raw = _sali_batch(points, params.A, params.B, params.C, params.K, t_max,
                      renorm_interval, sali_chaotic, rtol, atol, _A, _B8)
    return [_verdict(r[0], r[1], r[2], r[3] > 0.5, t_max,
                     sali_chaotic, sali_regular, drift_tol) for r in raw]


def _axis_potential_coeffs(params: ModelParams):
    # V(x, 0) = A x^2 + B x^3 + C x^4 on the y = 0 section
    return params.C, params.B, params.A


def sample_energy_shell(params: ModelParams, energy: float, count: int,
                        seed: int = 0) -> np.ndarray:
    """Initial conditions on the y = 0 section of the energy shell.

    (x, px) pairs are rejection-sampled uniformly over the section area
    {E - V(x,0) - px^2/(2K) >= 0}; y = 0 and py > 0 closes the shell.
    Returns an array of shape (count, 4).
    """
    c4, c3, c2 = _axis_potential_coeffs(params)
    roots = np.roots([c4, c3, c2, 0.0, -energy])
    xs = sorted(r.real for r in roots if abs(r.imag) < 1e-9 * max(1.0, abs(r)))

    def v_axis(x):
        return ((c4 * x + c3) * x + c2) * x * x

    xs = [x for x in xs if abs(v_axis(x) - energy) < 1e-6 * max(1.0, abs(energy))]
    # stationary points of V on the axis bound the minimum below the shell
    crit = np.roots([4.0 * c4, 3.0 * c3, 2.0 * c2, 0.0])
    v_min = min(v_axis(r.real) for r in crit if abs(r.imag) < 1e-9)
    if energy < v_min and not xs:
        raise ValueError(f"energy {energy} lies below the potential minimum "
                         f"{v_min} on the sampling section")
    if not xs:
        raise ValueError(f"no accessible region at energy {energy}")
    x_lo, x_hi = min(xs), max(xs)
    if count == 0:
        return np.empty((0, 4))
    px_max = math.sqrt(2.0 * params.K * max(energy - v_min, 0.0))
    if px_max == 0.0:
        raise ValueError("energy shell has zero section area")
    rng = np.random.default_rng(seed)
    out = np.empty((count, 4))
    got = 0
    while got < count:
        need = count - got
        x = rng.uniform(x_lo, x_hi, 2 * need + 16)
        px = rng.uniform(-px_max, px_max, x.size)
        py2 = 2.0 * params.K * (energy - v_axis(x)) - px * px
        okm = py2 >= 0.0
        take = min(int(okm.sum()), need)
        sel = np.nonzero(okm)[0][:take]
        out[got:got + take, 0] = x[sel]
        out[got:got + take, 1] = 0.0
        out[got:got + take, 2] = px[sel]
        out[got:got + take, 3] = np.sqrt(py2[sel])
        got += take
    return out


def regular_fraction(params: ModelParams, energy: float, count: int,
                     seed: int = 0, **classify_kwargs) -> RegularFractionPoint:
    """f_reg = N_reg / (N_tot - N_undecided) at one energy.

    The binomial error sqrt(f(1-f)/N) over the decided sample is attached;
    undecided trajectories are excluded from both numerator and denominator.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    pts = sample_energy_shell(params, energy, count, seed)
    results = classify_batch(pts, params, **classify_kwargs)
    n_reg = sum(r.classification == "regular" for r in results)
    n_cha = sum(r.classification == "chaotic" for r in results)
    n_und = len(results) - n_reg - n_cha
    decided = n_reg + n_cha
    f = n_reg / decided if decided else float("nan")
    sigma = math.sqrt(f * (1.0 - f) / decided) if decided else float("nan")
    return RegularFractionPoint(energy=energy, f_reg=f, sigma=sigma,
                                n_regular=n_reg, n_chaotic=n_cha, n_undecided=n_und)


def freg_map(params: ModelParams, b_values, e_values, count: int,
             seed: int = 0, **classify_kwargs) -> list[dict]:
    """Regular fraction over a (B, E) grid; per-cell failures are recorded."""
    rows = []
    for i, b in enumerate(b_values):
        p = ModelParams(A=params.A, B=float(b), C=params.C, K=params.K,
                        hbar=params.hbar)
        for j, e in enumerate(e_values):
            cell_seed = seed + 1_000_003 * i + j
            try:
                pt = regular_fraction(p, float(e), count, cell_seed, **classify_kwargs)
                rows.append({"B": float(b), "E": float(e), "f_reg": pt.f_reg,
                             "sigma": pt.sigma, "n_regular": pt.n_regular,
                             "n_chaotic": pt.n_chaotic,
                             "n_undecided": pt.n_undecided, "error": ""})
            except ValueError as exc:
                rows.append({"B": float(b), "E": float(e), "f_reg": float("nan"),
                             "sigma": float("nan"), "n_regular": 0, "n_chaotic": 0,
                             "n_undecided": 0, "error": str(exc)})
    return rows
