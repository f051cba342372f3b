"""Delimited output helpers: CSV with hash-prefixed metadata, PGM images."""

from __future__ import annotations

from pathlib import Path

import numpy as np

__all__ = ["write_csv", "read_csv", "write_pgm", "read_levels_file"]


def _fmt(v) -> str:
    if isinstance(v, float) or isinstance(v, np.floating):
        return f"{v:.17g}"
    return str(v)


def write_csv(path: str | Path, columns: dict, meta: dict | None = None) -> Path:
    """Write named columns as CSV with '#'-prefixed metadata header lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    arrays = [np.atleast_1d(np.asarray(columns[n])) for n in names]
    n_rows = len(arrays[0])
    if any(len(a) != n_rows for a in arrays):
        raise ValueError("all columns must have equal length")
    with open(path, "w", newline="\n") as fh:
        for k, v in (meta or {}).items():
            fh.write(f"# {k} = {v}\n")
        fh.write(",".join(names) + "\n")
        for i in range(n_rows):
            fh.write(",".join(_fmt(a[i]) for a in arrays) + "\n")
    return path


def read_csv(path: str | Path) -> tuple[dict, dict]:
    """Read a gcmlab CSV back into (meta, columns-of-strings-or-floats)."""
    meta: dict = {}
    rows: list[list[str]] = []
    names: list[str] | None = None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k.strip()] = v.strip()
                continue
            if names is None:
                names = line.split(",")
            else:
                rows.append(line.split(","))
    if names is None:
        raise ValueError(f"no data in {path}")
    cols: dict = {}
    for j, name in enumerate(names):
        raw = [r[j] if j < len(r) else "" for r in rows]
        try:
            cols[name] = np.array([float(v) if v else np.nan for v in raw])
        except ValueError:
            cols[name] = np.array(raw)
    return meta, cols


def read_levels_file(path: str | Path) -> np.ndarray:
    """Levels from a gcmlab spectrum CSV or a plain one-energy-per-line list.

    For gcmlab CSVs only the converged prefix is returned.
    """
    path = Path(path)
    with open(path) as fh:
        first_data = None
        for line in fh:
            s = line.strip()
            if s and not s.startswith("#"):
                first_data = s
                break
    if first_data is None:
        raise ValueError(f"no level data in {path}")
    if "," in first_data or first_data.replace(".", "").replace("-", "").isalpha():
        meta, cols = read_csv(path)
        if "energy" not in cols:
            raise ValueError(f"{path} has no 'energy' column")
        energies = cols["energy"]
        if "converged" in cols:
            energies = energies[cols["converged"] > 0.5]
        return np.sort(energies)
    return np.sort(np.loadtxt(path, ndmin=1))


def write_pgm(path: str | Path, values: np.ndarray) -> Path:
    """Peak-scaled 8-bit binary PGM (quick-look grayscale)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    v = np.asarray(values, dtype=float)
    peak = v.max()
    img = np.zeros(v.shape, dtype=np.uint8) if peak <= 0 else \
        np.clip(255.0 * v / peak, 0, 255).astype(np.uint8)
    img = img[::-1]  # image row order: top row = max y
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())
    return path
