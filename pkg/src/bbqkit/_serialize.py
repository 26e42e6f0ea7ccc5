"""Byte-deterministic JSON and CSV emission.

Repeated runs with identical inputs must produce byte-identical artifacts,
so floats are always rendered with 17 significant digits and dict insertion
order is preserved verbatim.
"""

from __future__ import annotations

import math
from typing import Any

__all__ = ["format_float", "canonical_json", "csv_rows"]


def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"non-finite value {x!r} cannot be serialized")
    return format(float(x), ".17g")


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    close_pad = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}"{key}": {_encode(value, indent, level + 1)}'
            for key, value in obj.items()
        )
        return "{\n" + items + "\n" + close_pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(f"{pad}{_encode(v, indent, level + 1)}" for v in obj)
        return "[\n" + items + "\n" + close_pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if obj is None:
        return "null"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def canonical_json(obj: Any, indent: int = 2) -> str:
    """Render ``obj`` as JSON text with fixed field order and float format."""
    return _encode(obj, indent, 0) + "\n"


def csv_rows(header: list[str], rows: list[list[Any]]) -> str:
    """Render a CSV body with the same float discipline as the JSON writer."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, float):
                cells.append(format_float(cell))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
