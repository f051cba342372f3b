"""Binary caches for assembled matrices and solved spectra.

Both formats share the header discipline: an 8-byte magic, a u32 version,
the matrix/spectrum geometry, the scheme tag and the five model parameters
plus a_osc, followed by a little-endian float64 payload.  Files are keyed by
a content hash of the minimal influencing inputs, so unrelated config
changes (statistics settings, output paths) never invalidate an eigensolve.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .basis import BasisSpec, QuantScheme
from .config import config_hash
from .hamiltonian import BandedSymmetricMatrix
from .model import ModelParams

__all__ = ["matrix_key", "spectrum_key", "save_matrix", "load_matrix",
           "save_spectrum", "load_spectrum"]

_MAGIC_BAND = b"GCMBND1\x00"
_MAGIC_SPEC = b"GCMSPC1\x00"
_VERSION = 1
# header after magic+version: scheme (8s), dim (q), half_bandwidth / converged (q),
# A B C K hbar a_osc (6d)
_HDR = struct.Struct("<8sI8sqq6d")


def _key_payload(params: ModelParams, spec: BasisSpec) -> dict:
    return {"A": params.A, "B": params.B, "C": params.C, "K": params.K,
            "hbar": params.hbar, "scheme": spec.scheme.value,
            "a_osc": spec.a_osc, "dimension": spec.dimension}


def matrix_key(params: ModelParams, spec: BasisSpec) -> str:
    return "band-" + config_hash(_key_payload(params, spec))


def spectrum_key(params: ModelParams, spec: BasisSpec, certify: str,
                 extra: dict | None = None) -> str:
    payload = _key_payload(params, spec) | {"certify": certify} | (extra or {})
    return "spec-" + config_hash(payload)


def _write_header(fh, magic: bytes, scheme: QuantScheme, dim: int, aux: int,
                  params: ModelParams, a_osc: float) -> None:
    fh.write(_HDR.pack(magic, _VERSION, scheme.value.encode().ljust(8, b"\x00"),
                       dim, aux, params.A, params.B, params.C, params.K,
                       params.hbar, a_osc))


def _read_header(fh, magic: bytes):
    blob = fh.read(_HDR.size)
    if len(blob) != _HDR.size:
        raise ValueError("truncated cache header")
    m, ver, scheme, dim, aux, a, b, c, k, hbar, a_osc = _HDR.unpack(blob)
    if m != magic:
        raise ValueError(f"bad cache magic {m!r}")
    if ver != _VERSION:
        raise ValueError(f"unsupported cache version {ver}")
    return (QuantScheme.from_string(scheme.rstrip(b"\x00").decode()), dim, aux,
            ModelParams(A=a, B=b, C=c, K=k, hbar=hbar), a_osc)


def save_matrix(path: str | Path, matrix: BandedSymmetricMatrix,
                params: ModelParams, spec: BasisSpec) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        _write_header(fh, _MAGIC_BAND, spec.scheme, matrix.dim,
                      matrix.half_bandwidth, params, spec.a_osc)
        fh.write(matrix.band.astype("<f8").tobytes())
    os.replace(tmp, path)


def load_matrix(path: str | Path) -> BandedSymmetricMatrix:
    with open(path, "rb") as fh:
        _, dim, hbw, _, _ = _read_header(fh, _MAGIC_BAND)
        payload = np.frombuffer(fh.read(), dtype="<f8")
    band = payload.reshape(hbw + 1, dim).astype(float)
    return BandedSymmetricMatrix(dim=dim, half_bandwidth=hbw, band=band)


def save_spectrum(path: str | Path, levels: np.ndarray, converged: int,
                  params: ModelParams, spec: BasisSpec) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        _write_header(fh, _MAGIC_SPEC, spec.scheme, len(levels), converged,
                      params, spec.a_osc)
        fh.write(np.asarray(levels, dtype="<f8").tobytes())
    os.replace(tmp, path)


def load_spectrum(path: str | Path):
    """Returns (levels, converged_count, scheme, params, a_osc)."""
    with open(path, "rb") as fh:
        scheme, n, converged, params, a_osc = _read_header(fh, _MAGIC_SPEC)
        levels = np.frombuffer(fh.read(), dtype="<f8").astype(float)
    if len(levels) != n:
        raise ValueError("spectrum cache payload size mismatch")
    return levels, converged, scheme, params, a_osc
