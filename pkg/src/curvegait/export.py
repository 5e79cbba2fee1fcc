"""Deterministic text output: fixed float formatting, JSON and atomic writes."""

from __future__ import annotations

import enum
import json
import math
from pathlib import Path

import numpy as np

from .mesh_io import atomic_write_bytes

SIGNIFICANT_DIGITS = 9


def format_float(x):
    """Render a float with 9 significant digits."""
    return f"{float(x):.{SIGNIFICANT_DIGITS}g}"


def plain(obj):
    """Convert to JSON-ready builtins, rounding floats to 9 significant digits.

    Non-finite floats become ``None``.
    """
    if isinstance(obj, dict):
        return {str(k.value if isinstance(k, enum.Enum) else k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(format_float(x)) if math.isfinite(x) else None
    if isinstance(obj, Path):
        return obj.as_posix()
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps_json(obj):
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(plain(obj), indent=2, sort_keys=True) + "\n"


def write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path, obj):
    write_text(path, dumps_json(obj))
