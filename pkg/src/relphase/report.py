"""Deterministic serialization of results.

Floats are written with 17 significant digits everywhere so that identical
inputs produce byte-identical files.  Complex numbers become {"re", "im"}
objects in JSON and separate re/im columns in CSV.
"""

from __future__ import annotations

import math
from typing import Any, Sequence

import numpy as np


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    return "0" if s == "-0" else s


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with sorted keys and 17-digit floats."""
    return _write(_plain(obj), 0, indent) + "\n"


def _write(obj: Any, level: int, indent: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_string(k)}: {_write(obj[k], level + 1, indent)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_write(v, 0, indent) for v in obj) + "]"
        items = [pad + _write(v, level + 1, indent) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    return _string(str(obj))


def _string(s: str) -> str:
    import json

    return json.dumps(s)


def _cell(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    s = str(v)
    if any(c in s for c in ',"\n\r'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """RFC 4180 style CSV with CRLF-free line endings."""
    lines = [",".join(_cell(h) for h in header)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def matrix_csv(d: np.ndarray, labels: Sequence[str] | None = None) -> str:
    """A complex matrix with one re,im column pair per column."""
    n = d.shape[1]
    labels = list(labels) if labels is not None else [str(i) for i in range(d.shape[0])]
    header = ["row"] + [f"{labels[j] if j < len(labels) else j}_{p}" for j in range(n) for p in ("re", "im")]
    rows = []
    for i in range(d.shape[0]):
        row: list[Any] = [labels[i]]
        for j in range(n):
            row += [float(d[i, j].real), float(d[i, j].imag)]
        rows.append(row)
    return csv_text(header, rows)


def aligned_text(rows: Sequence[dict], columns: Sequence[str] | None = None) -> str:
    if not rows:
        return ""
    columns = list(columns or rows[0].keys())
    cells = [[_cell(r.get(c, "")) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    out = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    for row in cells:
        out.append("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip())
    return "\n".join(out) + "\n"


def key_values(d: dict) -> str:
    keys = sorted(d)
    w = max((len(k) for k in keys), default=0)
    return "".join(f"{k.ljust(w)}  {_cell(d[k]) if not isinstance(d[k], (dict, list)) else dumps(d[k]).strip()}\n"
                   for k in keys)
