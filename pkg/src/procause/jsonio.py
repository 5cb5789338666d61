"""Canonical JSON: sorted keys, floats at 6 significant digits.

All persisted artifacts (logs, tables, PAGs, SEMs, query results) go through
this serializer so that re-running a stage on identical inputs is
byte-identical.
"""

from __future__ import annotations

import json
import math
import os
from typing import Any


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float in canonical JSON")
    if x == int(x) and abs(x) < 1e15:
        # keep integral floats readable and stable (75.0, not 75 or 7.5e+01)
        return f"{x:.1f}"
    return format(x, ".6g")


def _write(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"non-string key in canonical JSON: {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=False))
            out.append(":")
            _write(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _write(item, out)
        out.append("]")
    else:
        raise TypeError(f"unsupported type in canonical JSON: {type(obj).__name__}")


def canonical_dumps(obj: Any) -> str:
    out: list[str] = []
    _write(obj, out)
    return "".join(out)


def canonical_bytes(obj: Any) -> bytes:
    return (canonical_dumps(obj) + "\n").encode("utf-8")


def write_canonical(path, obj: Any) -> None:
    # atomic: readers never observe a half-written artifact
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(canonical_bytes(obj))
    os.replace(tmp, path)


def read_json(path) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)
