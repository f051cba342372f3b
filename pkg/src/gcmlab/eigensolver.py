"""Symmetric banded eigenproblem and convergence certification.

The banded matrix is reduced to tridiagonal form and diagonalized by LAPACK's
symmetric band drivers (implicit-shift QL/QR for values, inverse iteration on
the band matrix for selected vectors), which scipy exposes directly for the
packed layout used by :class:`~gcmlab.hamiltonian.BandedSymmetricMatrix`.

Truncation artifacts are certified away in two independent ways: missing
eigenvector tails in the oscillator basis, and stability of eigenvalues under
growth of the basis dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .basis import BasisSpec, QuantScheme
from .hamiltonian import BandedSymmetricMatrix
from .model import ModelParams

__all__ = [
    "Spectrum",
    "EigvecSet",
    "solve",
    "certify_convergence",
    "certify_by_dimension",
    "stability_prefix",
    "local_mean_spacing",
]


@dataclass
class Spectrum:
    """Sorted eigenvalues with provenance and a certified-prefix count."""

    scheme: QuantScheme
    params: ModelParams
    levels: np.ndarray
    converged_count: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=float)
        d = np.diff(self.levels)
        if (d < 0).any():
            raise ValueError("levels must be sorted ascending")
        scale = max(abs(self.levels[0]), abs(self.levels[-1]), 1e-300)
        self.meta.setdefault("tie_count", int((d <= 1e-13 * scale).sum()))
        if not 0 <= self.converged_count <= len(self.levels):
            raise ValueError("converged_count out of range")

    @property
    def converged_levels(self) -> np.ndarray:
        return self.levels[: self.converged_count]


@dataclass
class EigvecSet:
    """Eigenvector coefficients in the oscillator basis, one column per level."""

    vectors: np.ndarray  # (dim, nvec)
    first_index: int = 0

    def __post_init__(self):
        norms = np.linalg.norm(self.vectors, axis=0)
        if not np.allclose(norms, 1.0, atol=1e-10):
            raise ValueError("eigenvector columns must have unit norm")


def solve(matrix: BandedSymmetricMatrix, want_vectors: bool = False,
          vector_range: tuple[int, int] | None = None,
          scheme: QuantScheme | None = None,
          params: ModelParams | None = None,
          residual_samples: int = 20,
          seed: int = 0) -> tuple[np.ndarray, EigvecSet | None]:
    """All eigenvalues (sorted), optionally with vectors for an index range.

    ``vector_range = (lo, hi)`` requests vectors for levels lo..hi inclusive;
    ``want_vectors`` without a range computes the full set.  A residual
    spot-check ||Mv - lambda v|| <= 1e-9 ||M|| is run on a random sample of
    the returned pairs.  Non-convergence inside LAPACK raises LinAlgError.
    """
    band = matrix.band
    vecs = None
    if want_vectors and vector_range is None:
        levels, v = scipy.linalg.eig_banded(band, lower=True)
        vecs = EigvecSet(vectors=v, first_index=0)
    elif want_vectors:
        lo, hi = vector_range
        if not 0 <= lo <= hi < matrix.dim:
            raise ValueError(f"vector_range {vector_range} out of bounds")
        w, v = scipy.linalg.eig_banded(band, lower=True, select="i",
                                       select_range=(lo, hi))
        levels = scipy.linalg.eig_banded(band, lower=True, eigvals_only=True)
        vecs = EigvecSet(vectors=v, first_index=lo)
    else:
        levels = scipy.linalg.eig_banded(band, lower=True, eigvals_only=True)

    levels = np.sort(levels)
    if vecs is not None and residual_samples > 0:
        _spot_check_residuals(matrix, levels, vecs, residual_samples, seed)
    return levels, vecs


def _spot_check_residuals(matrix: BandedSymmetricMatrix, levels: np.ndarray,
                          vecs: EigvecSet, samples: int, seed: int) -> None:
    rng = np.random.default_rng(seed)
    nvec = vecs.vectors.shape[1]
    norm_m = max(abs(levels[0]), abs(levels[-1]))
    idx = rng.choice(nvec, size=min(samples, nvec), replace=False)
    for q in idx:
        lam = levels[vecs.first_index + q]
        v = vecs.vectors[:, q]
        res = np.linalg.norm(matrix.matvec(v.copy()) - lam * v)
        if res > 1e-9 * norm_m:
            raise RuntimeError(
                f"residual check failed on level {vecs.first_index + q}: "
                f"||Mv - lv|| = {res:.3e} > 1e-9 ||M|| = {1e-9 * norm_m:.3e}")


def certify_convergence(vecs: EigvecSet, tail_fraction: float = 0.15,
                        tail_mass_tol: float = 1e-8) -> int:
    """Largest prefix of levels whose basis-tail probability is negligible.

    A level is converged when the summed squared coefficients in the top
    ``tail_fraction`` of the (energy-ordered) basis stay below
    ``tail_mass_tol``; truncation-starved states show missing tails first.
    """
    dim, nvec = vecs.vectors.shape
    n_tail = max(1, int(math.ceil(tail_fraction * dim)))
    tail_mass = (vecs.vectors[dim - n_tail:, :] ** 2).sum(axis=0)
    bad = np.nonzero(tail_mass >= tail_mass_tol)[0]
    return int(bad[0]) if bad.size else nvec


def local_mean_spacing(levels: np.ndarray, window: int = 50) -> np.ndarray:
    """Mean nearest-neighbor spacing in a sliding window around each level."""
    n = len(levels)
    if n < 2:
        return np.full(n, np.nan)
    out = np.empty(n)
    half = max(1, window // 2)
    for q in range(n):
        lo = max(0, q - half)
        hi = min(n - 1, q + half)
        out[q] = (levels[hi] - levels[lo]) / (hi - lo)
    return out


def stability_prefix(levels: np.ndarray, bigger_levels: np.ndarray,
                     dE_tol: float = 1e-3) -> int:
    """Largest prefix on which a dimension-grown re-solve agrees.

    A level passes when its shift stays below dE_tol times the local mean
    spacing (the delta-E << Delta-E requirement for spacing statistics).
    """
    n = len(levels)
    spacing = local_mean_spacing(levels)
    shift = np.abs(levels - bigger_levels[:n])
    bad = np.nonzero(shift >= dE_tol * spacing)[0]
    return int(bad[0]) if bad.size else n


def certify_by_dimension(params: ModelParams, spec: BasisSpec,
                         growth_factor: float = 1.5, dE_tol: float = 1e-3,
                         levels: np.ndarray | None = None) -> tuple[int, np.ndarray]:
    """Certify levels by stability against a basis-dimension increase.

    Re-solves at dimension * growth_factor; returns (converged_count, levels
    of the base run).
    """
    from .hamiltonian import assemble

    if levels is None:
        levels, _ = solve(assemble(params, spec))
    if growth_factor <= 1.0:
        return len(levels), levels
    big_spec = spec.with_dimension(int(math.ceil(spec.dimension * growth_factor)))
    big_levels, _ = solve(assemble(params, big_spec))
    return stability_prefix(levels, big_levels, dE_tol), levels
