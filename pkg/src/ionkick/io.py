"""Deterministic CSV/JSON emission.

Floats are written with Python's shortest round-trip repr, so identical
inputs give byte-identical files on every platform.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def config_hash(payload) -> str:
    """SHA-256 of a canonical JSON rendering of ``payload``."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=_jsonable)
    return hashlib.sha256(text.encode()).hexdigest()


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_csv(path, columns, rows, header_comment: str | None = None):
    path = Path(path)
    lines = []
    if header_comment is not None:
        lines.append(f"# {header_comment}")
    lines.append(",".join(columns))
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Parse a file written by :func:`write_csv` into (comment, columns, rows)."""
    comment = None
    columns, rows = None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            comment = line[1:].strip()
        elif columns is None:
            columns = line.split(",")
        else:
            rows.append(line.split(","))
    return comment, columns, rows


def write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")
