"""Plain-text ``key = value`` documents.

Used for rate laws, environments, experiment configs and run summaries.
Values are JSON where JSON parses (numbers, lists, booleans), otherwise a
bare string. Floats are written with 17 significant digits so every
document round-trips exactly.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping


def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return json.dumps(str(x))
    if float(x).is_integer() and abs(x) < 1e16:
        return repr(float(x))
    return format(float(x), ".17g")


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, str):
        return value
    if value is None:
        return "null"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(format_value(v) if not isinstance(v, str) else json.dumps(v)
                               for v in value) + "]"
    # numpy scalars and the like
    if hasattr(value, "item"):
        return format_value(value.item())
    raise TypeError(f"cannot serialize value of type {type(value).__name__}")


def parse_value(text: str) -> Any:
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def dumps(items: Mapping[str, Any] | Iterable[tuple[str, Any]]) -> str:
    pairs = items.items() if isinstance(items, Mapping) else items
    lines = []
    for key, value in pairs:
        if "=" in key or "\n" in key:
            raise ValueError(f"invalid key {key!r}")
        lines.append(f"{key} = {format_value(value)}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = parse_value(value)
    return out


def dump(items, path: str | Path) -> None:
    Path(path).write_text(dumps(items))


def load(path: str | Path) -> dict[str, Any]:
    return loads(Path(path).read_text())
