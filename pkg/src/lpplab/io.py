"""Deterministic CSV/JSON output with a provenance header.

Files contain no timestamps, host names or worker counts, so identical
configurations produce identical bytes.
"""
from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .environment import RNG_KIND

RUN_ONLY_KEYS = ("workers", "out")  # do not change results, never hashed


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    clean = {k: v for k, v in cfg.items() if k not in RUN_ONLY_KEYS}
    return hashlib.sha256(canonical_json(clean).encode()).hexdigest()[:16]


def meta_block(cfg: dict, **extra) -> dict:
    from . import __version__
    clean = {k: v for k, v in cfg.items() if k not in RUN_ONLY_KEYS}
    meta = {"config": clean, "config_hash": config_hash(cfg),
            "rng_kind": RNG_KIND, "lpplab": __version__,
            "numpy": np.__version__}
    meta.update(extra)
    return meta


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def csv_text(columns, rows, meta: dict | None = None) -> str:
    buf = _io.StringIO()
    if meta is not None:
        buf.write("# meta: " + canonical_json(meta) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def write_csv(path, columns, rows, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(columns, rows, meta))
    return path


def read_csv(path):
    """(meta, header, rows) with rows as lists of strings."""
    lines = Path(path).read_text().splitlines()
    meta = None
    if lines and lines[0].startswith("# meta: "):
        meta = json.loads(lines[0][len("# meta: "):])
        lines = lines[1:]
    rows = list(csv.reader(lines))
    return meta, rows[0], rows[1:]


def write_json(path, report, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"meta": meta, "report": report} if meta is not None else report
    path.write_text(json.dumps(_plain(body), sort_keys=True, indent=1) + "\n")
    return path
