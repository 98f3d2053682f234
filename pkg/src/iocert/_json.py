"""Deterministic JSON and CSV output.

Floats are written with 17 significant digits so that they re-parse to the
same double; infinities become the strings ``"+inf"`` / ``"-inf"`` and
complex numbers ``[re, im]`` pairs.
"""

import json
import math
from pathlib import Path

import numpy as np


class ParseError(ValueError):
    """An input file could not be read as the expected structure."""


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"+inf"' if x > 0 else '"-inf"'
    if x == 0.0:
        return "0.0"
    text = format(x, ".17g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode([obj.real, obj.imag], 0, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # numeric rows stay on one line
        if all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, 0, level) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent=2):
    return _encode(obj, indent, 0) + "\n"


def _restore(obj):
    if isinstance(obj, str) and obj in ("+inf", "inf", "-inf", "nan"):
        return float(obj)
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    return obj


def loads(text):
    try:
        return _restore(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc


def load_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return loads(text)


def matrix_from_json(obj, key="M"):
    """2-D float array from nested lists or a dict holding them under ``key``."""
    if isinstance(obj, dict):
        if key not in obj:
            raise ParseError(f"expected a {key!r} entry")
        obj = obj[key]
    try:
        A = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"not a numeric matrix: {exc}") from exc
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2:
        raise ParseError(f"expected a 2-D matrix, got {A.ndim} dimensions")
    if not np.all(np.isfinite(A)):
        raise ParseError("matrix entries must be finite")
    return A


def vector_from_json(obj, key="x"):
    if isinstance(obj, dict):
        if key not in obj:
            raise ParseError(f"expected a {key!r} entry")
        obj = obj[key]
    try:
        v = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"not a numeric vector: {exc}") from exc
    if v.ndim != 1:
        raise ParseError("expected a flat array")
    return v


def complex_from_json(obj):
    """Inverse of the ``[re, im]`` encoding for arrays."""
    A = np.array(obj, dtype=float)
    if A.shape[-1] != 2:
        raise ParseError("complex arrays need [re, im] pairs in the last axis")
    return A[..., 0] + 1j * A[..., 1]


def csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if v is None:
                cells.append("")
            elif isinstance(v, (int, np.integer)) and not isinstance(v, bool):
                cells.append(str(int(v)))
            else:
                cells.append(format_float(v).strip('"'))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
