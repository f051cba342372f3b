"""Stage orchestration shared by the CLI subcommands.

Each stage consults the binary cache (keyed by the minimal influencing
inputs), records its wall clock in the run manifest and emits CSV tables
with a hash-carrying metadata header, plus rendered figures.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import __version__
from .basis import BasisSpec, QuantScheme
from .cache import (load_matrix, load_spectrum, matrix_key, save_matrix,
                    save_spectrum, spectrum_key)
from .config import RunConfig, config_hash
from .eigensolver import Spectrum, certify_convergence, solve, stability_prefix
from .hamiltonian import assemble, optimize_a_osc
from .manifest import RunManifest
from .model import ModelParams

__all__ = ["resolve_basis_spec", "run_spectrum", "csv_meta"]


def csv_meta(cfg_hash: str, **extra) -> dict:
    meta = {"tool": "gcmlab", "version": __version__, "config_hash": cfg_hash}
    meta.update(extra)
    return meta


def resolve_basis_spec(cfg: RunConfig, scheme: QuantScheme,
                       params: ModelParams) -> BasisSpec:
    dim = cfg.getint("basis", "dimension")
    spec = BasisSpec(scheme, a_osc=1.0, K=params.K, hbar=params.hbar,
                     dimension=dim)
    setting = cfg.get("basis", "a_osc").strip().lower()
    if setting == "auto":
        a = optimize_a_osc(params, spec, c_shift=cfg.getfloat("basis", "c_shift"))
    else:
        a = float(setting)
    return spec.with_a_osc(a)


def _solve_cached(params: ModelParams, spec: BasisSpec, cache_dir: Path | None,
                  manifest: RunManifest | None, label: str) -> np.ndarray:
    """Eigenvalues of the assembled Hamiltonian, through the binary caches."""
    spec_path = None
    if cache_dir is not None:
        spec_path = cache_dir / (spectrum_key(params, spec, certify="raw") + ".bin")
        if spec_path.exists():
            levels, _, _, _, _ = load_spectrum(spec_path)
            if manifest is not None:
                with manifest.stage(f"eigensolve:{label}", cache_hit=True,
                                    dimension=spec.dimension):
                    pass
            return levels

    matrix = None
    if cache_dir is not None:
        mat_path = cache_dir / (matrix_key(params, spec) + ".bin")
        if mat_path.exists():
            matrix = load_matrix(mat_path)
            if manifest is not None:
                with manifest.stage(f"assemble:{label}", cache_hit=True):
                    pass
    if matrix is None:
        if manifest is not None:
            with manifest.stage(f"assemble:{label}", cache_hit=False,
                                dimension=spec.dimension):
                matrix = assemble(params, spec)
        else:
            matrix = assemble(params, spec)
        if cache_dir is not None:
            save_matrix(cache_dir / (matrix_key(params, spec) + ".bin"),
                        matrix, params, spec)

    if manifest is not None:
        with manifest.stage(f"eigensolve:{label}", cache_hit=False,
                            dimension=spec.dimension,
                            half_bandwidth=matrix.half_bandwidth):
            levels, _ = solve(matrix)
    else:
        levels, _ = solve(matrix)
    if spec_path is not None:
        save_spectrum(spec_path, levels, len(levels), params, spec)
    return levels


def run_spectrum(cfg: RunConfig, scheme: QuantScheme,
                 cache_dir: Path | None = None,
                 manifest: RunManifest | None = None) -> tuple[Spectrum, BasisSpec]:
    """Assemble, solve and certify one scheme; fully cache-aware."""
    params = cfg.model_params
    spec = resolve_basis_spec(cfg, scheme, params)
    certify = cfg.get("solver", "certify").strip().lower()
    if certify not in ("none", "tail", "dimension", "both"):
        raise ValueError(f"unknown certify mode {certify!r}")

    levels = _solve_cached(params, spec, cache_dir, manifest, scheme.value)
    counts = [len(levels)]

    if certify in ("dimension", "both"):
        growth = cfg.getfloat("solver", "growth_factor")
        big_spec = spec.with_dimension(int(math.ceil(spec.dimension * growth)))
        if big_spec.dimension > spec.dimension:
            big = _solve_cached(params, big_spec, cache_dir, manifest,
                                scheme.value + ":growth")
            counts.append(stability_prefix(levels, big,
                                           cfg.getfloat("solver", "de_tol")))
    if certify in ("tail", "both"):
        matrix = assemble(params, spec)
        if manifest is not None:
            with manifest.stage(f"eigenvectors:{scheme.value}",
                                dimension=spec.dimension):
                _, vecs = solve(matrix, want_vectors=True)
        else:
            _, vecs = solve(matrix, want_vectors=True)
        counts.append(certify_convergence(
            vecs, cfg.getfloat("solver", "tail_fraction"),
            cfg.getfloat("solver", "tail_mass_tol")))

    spectrum = Spectrum(scheme=scheme, params=params, levels=levels,
                        converged_count=min(counts),
                        meta={"a_osc": spec.a_osc, "dimension": spec.dimension,
                              "certify": certify})
    return spectrum, spec
