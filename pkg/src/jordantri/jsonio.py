"""Deterministic JSON output.

Floats are written with 17 significant digits so that every value
round-trips exactly; complex numbers become ``[re, im]`` pairs and numpy
arrays become nested lists. Keys keep insertion order, so two runs that
build the same report produce the same bytes.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np


def _float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    s = format(x, ".17g")
    # keep integral floats visibly floating
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def to_plain(obj: Any) -> Any:
    """Convert numpy scalars, arrays and complex numbers to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _emit(obj: Any, out: list, indent: int | None, level: int) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        # numeric rows stay on one line
        flat = indent is None or all(not isinstance(v, (list, dict)) for v in obj) \
            or all(isinstance(v, list) and all(not isinstance(w, (list, dict)) for w in v) for v in obj)
        if flat:
            out.append("[")
            for i, v in enumerate(obj):
                if i:
                    out.append(", ")
                _emit(v, out, None, level + 1)
            out.append("]")
        else:
            pad = " " * (indent * (level + 1))
            out.append("[\n")
            for i, v in enumerate(obj):
                if i:
                    out.append(",\n")
                out.append(pad)
                _emit(v, out, indent, level + 1)
            out.append("\n" + " " * (indent * level) + "]")
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        if indent is None:
            out.append("{")
            for i, (k, v) in enumerate(obj.items()):
                if i:
                    out.append(", ")
                out.append(json.dumps(k) + ": ")
                _emit(v, out, None, level + 1)
            out.append("}")
        else:
            pad = " " * (indent * (level + 1))
            out.append("{\n")
            for i, (k, v) in enumerate(obj.items()):
                if i:
                    out.append(",\n")
                out.append(pad + json.dumps(k) + ": ")
                _emit(v, out, indent, level + 1)
            out.append("\n" + " " * (indent * level) + "}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int | None = 2) -> str:
    """Serialize ``obj`` to a JSON string with 17-digit floats."""
    out: list = []
    _emit(to_plain(obj), out, indent, 0)
    return "".join(out)


def loads(text: str) -> Any:
    return json.loads(text)
