"""Deterministic JSON/CSV writers for bench reports.

Floats are always written as 17 significant digits in scientific notation and
JSON keys are sorted, so equal reports serialize to identical bytes.
Non-finite floats become null / empty cells.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable, Mapping
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel


def format_float(x: float) -> str:
    return f"{x:.16e}"


def to_plain(obj: Any) -> Any:
    """Reduce models, enums and numpy values to builtin containers and scalars."""
    if isinstance(obj, BaseModel):
        return to_plain(obj.model_dump())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Mapping):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _encode(obj: Any, out: list[str]) -> None:
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj) if math.isfinite(obj) else "null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for pos, key in enumerate(sorted(obj)):
            if pos:
                out.append(", ")
            out.append(json.dumps(key) + ": ")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, list):
        out.append("[")
        for pos, item in enumerate(obj):
            if pos:
                out.append(", ")
            _encode(item, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """JSON text with sorted keys and fixed float formatting."""
    out: list[str] = []
    _encode(to_plain(obj), out)
    return "".join(out) + "\n"


def flatten_row(row: Mapping[str, Any]) -> dict[str, Any]:
    """Expand list-valued fields into ``name_1, name_2, ...`` columns."""
    flat: dict[str, Any] = {}
    for key, value in to_plain(row).items():
        if isinstance(value, list):
            for pos, item in enumerate(value, start=1):
                flat[f"{key}_{pos}"] = item
        else:
            flat[key] = value
    return flat


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value) if math.isfinite(value) else ""
    return str(value)


def csv_text(rows: Iterable[Mapping[str, Any]]) -> str:
    """Header plus one line per row; columns follow the first row's field order."""
    flat = [flatten_row(r) for r in rows]
    buf = io.StringIO()
    if not flat:
        return ""
    writer = csv.writer(buf, lineterminator="\n")
    header = list(flat[0])
    writer.writerow(header)
    for row in flat:
        writer.writerow([_cell(row.get(col)) for col in header])
    return buf.getvalue()


def render(report: BaseModel, rows: Iterable[Mapping[str, Any]], fmt: str) -> str:
    """The whole report as JSON, or its per-row table as CSV."""
    if fmt == "json":
        return dumps(report)
    return csv_text(rows)


def write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
