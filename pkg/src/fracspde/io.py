"""Deterministic, atomic CSV and JSON output.

Floats are written with ``%.17g`` so every value round-trips exactly and a
rerun of the same configuration reproduces the same bytes.
"""

from __future__ import annotations

import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__

__all__ = [
    "atomic_write_text",
    "file_sha256",
    "to_jsonable",
    "write_csv",
    "write_json",
    "write_manifest",
    "write_noise",
    "write_solution",
]


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]] | np.ndarray) -> Path:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    if isinstance(rows, np.ndarray):
        rows = rows.astype(float).tolist()
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return atomic_write_text(path, buf.getvalue())


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def write_json(path: str | Path, obj: Any) -> Path:
    return atomic_write_text(path, json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n")


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_solution(directory: str | Path, name: str, u, extra: dict[str, Any] | None = None) -> tuple[Path, Path]:
    """``<name>.csv`` (rows = time, columns = t then the spatial nodes) plus ``<name>.json``."""
    directory = Path(directory)
    x = u.spatial.x
    header = ["t"] + ["x=%.17g" % v for v in x]
    data = np.column_stack([u.times, u.values])
    csv_path = write_csv(directory / f"{name}.csv", header, data)
    side = {
        "method": u.method,
        "n_steps": u.grid.n_steps,
        "T": u.grid.T,
        "n_x": u.spatial.n_x,
        "norms": u.norms,
        "diagnostics": u.diagnostics,
        "csv_sha256": file_sha256(csv_path),
        **(extra or {}),
    }
    json_path = write_json(directory / f"{name}.json", side)
    return csv_path, json_path


def write_noise(directory: str | Path, noise) -> tuple[Path, Path]:
    """Mode paths as CSV (rows = time, columns = modes) plus the spectral data."""
    directory = Path(directory)
    header = ["t"] + [f"B_{i + 1}" for i in range(noise.n_modes)]
    csv_path = write_csv(directory / "noise_modes.csv", header, np.column_stack([noise.grid.points, noise.mode_paths.T]))
    meta = {
        "H": noise.H,
        "seed": noise.seed,
        "mode_seeds": list(noise.seeds),
        "lambdas": noise.cov.lambdas,
        "method": noise.method,
        "csv_sha256": file_sha256(csv_path),
    }
    return csv_path, write_json(directory / "noise_modes.json", meta)


def write_manifest(directory: str | Path, config, seeds: Sequence[int], files: Sequence[Path], extra: dict[str, Any] | None = None) -> Path:
    """Everything needed to reproduce the run: config, its hash, seeds, version and output digests."""
    directory = Path(directory)
    manifest = {
        "version": __version__,
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
        "seeds": list(seeds),
        "files": {Path(f).name: file_sha256(f) for f in sorted(files, key=lambda p: Path(p).name)},
        **(extra or {}),
    }
    return write_json(directory / "manifest.json", manifest)
