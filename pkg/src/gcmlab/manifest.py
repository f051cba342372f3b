"""Run manifests: config hash, stage timings, hashed output inventory."""

from __future__ import annotations

import hashlib
import json
import time
from contextlib import contextmanager
from pathlib import Path

from . import __version__

__all__ = ["RunManifest"]


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class RunManifest:
    def __init__(self, out_dir: str | Path, config_hash: str, command: str):
        self.out_dir = Path(out_dir)
        self.data = {
            "tool": "gcmlab",
            "version": __version__,
            "command": command,
            "config_hash": config_hash,
            "stages": [],
            "outputs": {},
        }

    @contextmanager
    def stage(self, name: str, **info):
        t0 = time.perf_counter()
        record = {"stage": name, **info}
        try:
            yield record
        finally:
            record["seconds"] = round(time.perf_counter() - t0, 4)
            self.data["stages"].append(record)

    def add_output(self, path: str | Path) -> None:
        path = Path(path)
        self.data["outputs"][path.name] = _sha256(path)

    def write(self) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        target = self.out_dir / "manifest.json"
        with open(target, "w") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return target
