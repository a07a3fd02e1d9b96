"""Result persistence: RFC 4180 CSV and JSON with 17-significant-digit floats."""

from __future__ import annotations

import json
import math

import numpy as np

__all__ = ["write_json", "write_csv_rows", "fmt17"]


def fmt17(x: float) -> str:
    return f"{x:.17g}"


class _RawFloat:
    def __init__(self, value: float):
        self.value = value


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return _RawFloat(float(obj))
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_to_jsonable(v) for v in obj.tolist()]
    return obj


def _dump(obj, fh, indent=0) -> None:
    pad = "  " * indent
    if isinstance(obj, _RawFloat):
        v = obj.value
        fh.write("null" if (math.isnan(v) or math.isinf(v)) else fmt17(v))
    elif isinstance(obj, dict):
        fh.write("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            fh.write(pad + "  " + json.dumps(str(k)) + ": ")
            _dump(v, fh, indent + 1)
            fh.write(",\n" if i + 1 < len(items) else "\n")
        fh.write(pad + "}")
    elif isinstance(obj, list):
        fh.write("[")
        for i, v in enumerate(obj):
            _dump(v, fh, indent)
            if i + 1 < len(obj):
                fh.write(", ")
        fh.write("]")
    else:
        fh.write(json.dumps(obj))


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        _dump(_to_jsonable(obj), fh)
        fh.write("\n")


def write_csv_rows(path, headers: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(headers) + "\r\n")
        for row in rows:
            cells = []
            for key in headers:
                val = row.get(key)
                if isinstance(val, (float, np.floating)):
                    cells.append(fmt17(float(val)))
                elif val is None:
                    cells.append("")
                else:
                    cells.append(str(val))
            fh.write(",".join(cells) + "\r\n")
