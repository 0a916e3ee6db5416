"""CSV datasets with JSON sidecars, and JSON reports."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from emx.errors import ConfigError
from emx.synth import COLUMNS, SyntheticDataset


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False) + "\n"


def sidecar_path(csv_path: str | Path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".meta.json")


def write_dataset(ds: SyntheticDataset, path: str | Path) -> tuple[Path, Path]:
    """Write the CSV (full ``repr`` precision) and its sidecar JSON."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ds.columns.keys())
        for row in zip(*ds.columns.values()):
            w.writerow(repr(float(v)) for v in row)
    side = sidecar_path(path)
    side.write_text(dumps({"kind": ds.kind, "columns": list(ds.columns), "true_params": ds.true_params,
                           "metadata": ds.metadata}))
    return path, side


def _kind_from_header(header: list[str]) -> str:
    for kind, cols in COLUMNS.items():
        if tuple(header) == cols:
            return kind
    raise ConfigError("", f"CSV header {header} matches no dataset kind")


def read_dataset(path: str | Path) -> SyntheticDataset:
    """Read a dataset CSV; the sidecar, when present, supplies kind and metadata."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError("", f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    kind = _kind_from_header(header)
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float).reshape(-1, len(header))
    except ValueError as exc:
        raise ConfigError("", f"{path}: non-numeric value ({exc})") from exc
    true_params, meta = {}, {}
    side = sidecar_path(path)
    if side.exists():
        doc = json.loads(side.read_text())
        if doc.get("kind", kind) != kind:
            raise ConfigError("kind", f"sidecar says {doc['kind']} but columns say {kind}")
        true_params, meta = doc.get("true_params", {}), doc.get("metadata", {})
    cols = {h: data[:, i] for i, h in enumerate(header)}
    return SyntheticDataset(kind, cols, true_params, meta)
