"""Eigenstate probability densities on the (x, y) shape plane.

For the 2D schemes the plotted density is |Psi(x, y)|^2 directly (Jacobian
beta already accounted for by the Cartesian area element); the 5D scalar
product carries the measure beta^4 |sin 3gamma|, so the density per unit
Cartesian area acquires the extra factor beta^3 |sin 3gamma| and vanishes on
the sin 3gamma = 0 rays.

Grid evaluation precomputes the radial ladders and angular profiles on a
polar scratch grid and resamples bilinearly to the Cartesian target; the
gamma grid count is kept a multiple of 3 so the three-fold symmetry survives
interpolation exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSpec, QuantScheme, angular_block, enumerate_basis, radial_block
from .model import ModelParams, accessible_boundary

__all__ = ["DensityGrid", "density_at", "density_grid", "boundary_polylines"]


@dataclass
class DensityGrid:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # shape (len(y), len(x)), density per unit area
    scheme: QuantScheme
    level_index: int
    energy: float
    boundary: list[np.ndarray] = field(default_factory=list)

    def cell_area(self) -> float:
        return float((self.x[1] - self.x[0]) * (self.y[1] - self.y[0]))

    def norm(self) -> float:
        return float(self.values.sum() * self.cell_area())


def _group_by_m(vec: np.ndarray, spec: BasisSpec):
    states = enumerate_basis(spec)
    if len(vec) != len(states):
        raise ValueError(f"eigenvector length {len(vec)} != basis dimension {len(states)}")
    groups: dict[int, list[tuple[int, float]]] = {}
    for coeff, st in zip(vec, states):
        groups.setdefault(st.m_ang, []).append((st.n_rad, float(coeff)))
    return groups


def _psi_on(vec: np.ndarray, spec: BasisSpec, beta: np.ndarray,
            gamma: np.ndarray) -> np.ndarray:
    """Wave function at paired (beta, gamma) points (same shape arrays)."""
    groups = _group_by_m(vec, spec)
    psi = np.zeros_like(beta, dtype=float)
    for m, entries in groups.items():
        n_max = max(n for n, _ in entries)
        rb = radial_block(spec, m, n_max, beta.ravel())
        f = np.zeros(beta.size)
        for n, coeff in entries:
            if coeff != 0.0:
                f += coeff * rb[n]
        ang = angular_block(spec.scheme, m, gamma.ravel())[m]
        psi += (f * ang).reshape(beta.shape)
    return psi


def density_at(vec: np.ndarray, spec: BasisSpec, x, y):
    """Probability density per unit Cartesian area at arbitrary points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 0 and y.ndim == 0
    x, y = np.atleast_1d(x), np.atleast_1d(y)
    beta = np.hypot(x, y)
    gamma = np.arctan2(y, x)
    rho = _psi_on(np.asarray(vec, dtype=float), spec, beta, gamma) ** 2
    if spec.scheme is QuantScheme.FIVE_D:
        rho *= beta ** 3 * np.abs(np.sin(3.0 * gamma))
    return float(rho[0]) if scalar else rho


def boundary_polylines(params: ModelParams, energy: float,
                       n_gamma: int = 361) -> list[np.ndarray]:
    """Kinematic boundary V = E as polylines in the (x, y) plane."""
    gammas = np.linspace(0.0, 2.0 * math.pi, n_gamma)
    outer = []
    inner = []
    for g in gammas:
        intervals = accessible_boundary(params, energy, g)
        if intervals:
            outer.append((intervals[-1][1] * math.cos(g), intervals[-1][1] * math.sin(g)))
            lo = intervals[0][0]
            inner.append((lo * math.cos(g), lo * math.sin(g)) if lo > 0 else None)
        else:
            outer.append(None)
            inner.append(None)

    def segments(pts):
        segs, cur = [], []
        for p in pts:
            if p is None:
                if len(cur) > 1:
                    segs.append(np.array(cur))
                cur = []
            else:
                cur.append(p)
        if len(cur) > 1:
            segs.append(np.array(cur))
        return segs

    return segments(outer) + segments(inner)


def density_grid(vec: np.ndarray, spec: BasisSpec, params: ModelParams,
                 energy: float, level_index: int = 0,
                 x_range: tuple[float, float] | None = None,
                 n_points: int = 201, scratch_beta: int = 800,
                 scratch_gamma: int = 720) -> DensityGrid:
    """Dense density evaluation with the kinematic boundary attached.

    The default window covers the accessible region at ``energy`` plus a 30%
    margin.  ``scratch_gamma`` is rounded up to a multiple of 3.
    """
    if x_range is None:
        bmax = 0.0
        for g in np.linspace(0.0, 2.0 * math.pi / 3.0, 61):
            for lo, hi in accessible_boundary(params, energy, g):
                bmax = max(bmax, hi)
        if bmax == 0.0:
            bmax = 1.0
        lim = 1.3 * bmax
        x_range = (-lim, lim)
    x = np.linspace(x_range[0], x_range[1], n_points)
    y = np.linspace(x_range[0], x_range[1], n_points)

    scratch_gamma += (-scratch_gamma) % 3
    beta_max = math.hypot(max(abs(x_range[0]), abs(x_range[1])),
                          max(abs(x_range[0]), abs(x_range[1])))
    bgrid = np.linspace(0.0, beta_max, scratch_beta)
    ggrid = np.linspace(0.0, 2.0 * math.pi, scratch_gamma + 1)

    vec = np.asarray(vec, dtype=float)
    groups = _group_by_m(vec, spec)
    m_max = max(groups)
    ang = angular_block(spec.scheme, m_max, ggrid)
    fm = np.zeros((m_max + 1, scratch_beta))
    for m, entries in groups.items():
        n_max = max(n for n, _ in entries)
        rb = radial_block(spec, m, n_max, bgrid)
        for n, coeff in entries:
            if coeff != 0.0:
                fm[m] += coeff * rb[n]
    psi_polar = fm.T @ ang  # (scratch_beta, scratch_gamma + 1)

    xx, yy = np.meshgrid(x, y)
    bb = np.hypot(xx, yy)
    gg = np.mod(np.arctan2(yy, xx), 2.0 * math.pi)
    db = bgrid[1] - bgrid[0]
    dg = ggrid[1] - ggrid[0]
    ib = np.clip((bb / db).astype(int), 0, scratch_beta - 2)
    ig = np.clip((gg / dg).astype(int), 0, scratch_gamma - 1)
    tb = bb / db - ib
    tg = gg / dg - ig
    psi = ((1 - tb) * (1 - tg) * psi_polar[ib, ig]
           + tb * (1 - tg) * psi_polar[ib + 1, ig]
           + (1 - tb) * tg * psi_polar[ib, ig + 1]
           + tb * tg * psi_polar[ib + 1, ig + 1])
    psi[bb > bgrid[-1]] = 0.0
    rho = psi ** 2
    if spec.scheme is QuantScheme.FIVE_D:
        rho *= bb ** 3 * np.abs(np.sin(3.0 * gg))
    return DensityGrid(x=x, y=y, values=rho, scheme=spec.scheme,
                       level_index=level_index, energy=energy,
                       boundary=boundary_polylines(params, energy))
