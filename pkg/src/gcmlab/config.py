"""Run configuration: INI-style config files with CLI flag overrides.

A run is described by one plain-text file with ``key = value`` entries in
sections; every CLI subcommand accepts ``--config FILE`` plus per-key
override flags.  Grids can be written as ``lo:hi:count`` (inclusive linear
grid) or as comma-separated values.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .basis import QuantScheme
from .model import ModelParams

__all__ = ["RunConfig", "parse_grid", "config_hash"]

_DEFAULTS = {
    "model": {"A": "-1.0", "B": "1.09", "C": "1.0", "K": "1.0", "hbar": "0.05"},
    "basis": {"scheme": "2d-even", "a_osc": "auto", "c_shift": "0.6",
              "dimension": "1000"},
    "solver": {"certify": "dimension", "growth_factor": "1.5", "de_tol": "1e-3",
               "tail_fraction": "0.15", "tail_mass_tol": "1e-8"},
    "stats": {"bin_size": "1000", "shift": "100", "unfold_degree": "5",
              "seed": "1", "attach_errors": "false", "error_trials": "200"},
    "classical": {"t_max": "10000", "count": "200", "energies": "-0.2:2.0:12",
                  "sali_chaotic": "1e-8", "sali_regular": "1e-4",
                  "renorm_interval": "1.0", "rtol": "3e-14", "atol": "3e-14",
                  "drift_tol": "1e-9", "seed": "1"},
    "map": {"b_values": "0.0:1.2:13", "e_values": "-0.2:0.2:5"},
    "density": {"levels": "0", "grid_points": "201"},
    "output": {"dir": "runs/out", "cache_dir": "", "plots": "true"},
}


def parse_grid(text: str) -> np.ndarray:
    """Parse ``lo:hi:count`` or ``v1,v2,...`` into an array of floats."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec must be lo:hi:count, got {text!r}")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise ValueError(f"grid count must be >= 1 in {text!r}")
        return np.linspace(lo, hi, n)
    return np.array([float(v) for v in text.split(",") if v.strip()])


@dataclass
class RunConfig:
    """Fully parsed run configuration with stable hashing per stage."""

    raw: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | None = None, overrides: dict | None = None) -> "RunConfig":
        cp = configparser.ConfigParser()
        cp.read_dict(_DEFAULTS)
        if path is not None:
            with open(path) as fh:
                cp.read_file(fh)
        for dotted, value in (overrides or {}).items():
            if value is None:
                continue
            section, key = dotted.split(".", 1)
            if not cp.has_section(section):
                cp.add_section(section)
            cp.set(section, key, str(value))
        raw = {s: dict(cp.items(s)) for s in cp.sections()}
        return cls(raw=raw)

    def get(self, section: str, key: str) -> str:
        return self.raw[section][key]

    def getfloat(self, section: str, key: str) -> float:
        return float(self.get(section, key))

    def getint(self, section: str, key: str) -> int:
        return int(self.get(section, key))

    def getbool(self, section: str, key: str) -> bool:
        return self.get(section, key).strip().lower() in ("1", "true", "yes", "on")

    @property
    def model_params(self) -> ModelParams:
        m = self.raw["model"]
        return ModelParams(A=float(m["a"]), B=float(m["b"]), C=float(m["c"]),
                           K=float(m["k"]), hbar=float(m["hbar"]))

    @property
    def schemes(self) -> list[QuantScheme]:
        names = [s.strip() for s in self.get("basis", "scheme").split(",") if s.strip()]
        if not names:
            raise ValueError("no quantization scheme configured")
        return [QuantScheme.from_string(n) for n in names]

    def subset(self, sections: tuple[str, ...]) -> dict:
        return {s: dict(sorted(self.raw[s].items())) for s in sections if s in self.raw}


def config_hash(payload: dict) -> str:
    """Stable short hash of a config subset (cache keys, output headers)."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
