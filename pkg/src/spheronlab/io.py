"""Deterministic JSON and CSV output.

Floats are written with Python's shortest round-trip repr, so identical
inputs give byte-identical files and every value reads back exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Sequence

import numpy as np


def to_jsonable(obj: Any) -> Any:
    """Convert numpy scalars/arrays and complex numbers to plain JSON types.

    Complex values become ``{"re": ..., "im": ...}``; non-finite floats
    become ``null``.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj: Any) -> str:
    """Deterministic JSON text (insertion-ordered keys, trailing newline)."""
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False) + "\n"


def loads(text: str) -> Any:
    return json.loads(text)


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def read_csv(text: str):
    """``(header, rows)`` with numeric cells parsed as float."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = []
    for row in reader:
        parsed = []
        for cell in row:
            try:
                parsed.append(float(cell))
            except ValueError:
                parsed.append(cell)
        rows.append(parsed)
    return header, rows


def read_levels(path: str) -> np.ndarray:
    """Level energies from a CSV/whitespace file: the last numeric column of each row."""
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cells = [c for c in line.replace(",", " ").split() if c]
            try:
                values.append(float(cells[-1]))
            except ValueError:
                continue  # header row
    if not values:
        raise ValueError(f"no level energies found in {path}")
    return np.array(values)
