"""JSON / CSV writers. All writes go through a temp file and a rename."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no NaN / inf
        return x if math.isfinite(x) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=1, allow_nan=False) + "\n"


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    tmp.write_text(text)
    tmp.replace(path)
    return path


def write_json(path, obj) -> Path:
    return atomic_write(path, dumps(obj))


def read_json(path):
    return json.loads(Path(path).read_text())


def csv_text(header: list, rows, meta: dict | None = None) -> str:
    lines = []
    if meta is not None:
        lines.append("# " + json.dumps(_clean(meta), separators=(",", ":")))
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        return repr(x) if math.isfinite(x) else ""
    return str(v)


def write_csv(path, header: list, rows, meta: dict | None = None) -> Path:
    return atomic_write(path, csv_text(header, rows, meta))
