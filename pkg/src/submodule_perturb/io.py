"""Deterministic CSV/JSON serialization.

Floats are written with 17 significant digits (``%.17g``), rows in the order
given, and JSON keys in insertion order, so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Iterable, Sequence

from . import __version__

__all__ = ["fmt", "to_plain", "write_csv", "write_json", "render"]


def fmt(x) -> str:
    """17-significant-digit text for a scalar; complex as ``re+imj``, None as empty."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    if isinstance(x, float):
        return f"{x:.17g}"
    try:
        return fmt(x.item())  # numpy scalar
    except AttributeError:
        return str(x)


def to_plain(obj):
    """Convert numpy scalars/arrays, tuples and Fractions into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "tolist"):
        return to_plain(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _dump(obj, indent: int | None) -> str:
    def walk(o, depth):
        pad = "" if indent is None else "\n" + " " * (indent * (depth + 1))
        end = "" if indent is None else "\n" + " " * (indent * depth)
        sep = ","
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(k)}: {walk(v, depth + 1)}" for k, v in o.items()]
            return "{" + sep.join(items) + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(walk(v, depth + 1) for v in o) + "]"
            return "[" + sep.join(f"{pad}{walk(v, depth + 1)}" for v in o) + end + "]"
        if isinstance(o, float):
            return fmt(o)
        return json.dumps(o)

    return walk(obj, 0)


def metadata(command: str, config: dict) -> dict:
    return {"program": "submodule-perturb", "version": __version__,
            "command": command, "config": to_plain(config)}


def write_json(command: str, config: dict, data, indent: int | None = 2) -> str:
    """JSON document ``{"metadata": ..., "data": ...}`` as text."""
    doc = {"metadata": metadata(command, config), "data": to_plain(data)}
    return _dump(doc, indent) + "\n"


def write_csv(header: Sequence[str], rows: Iterable[Sequence], comment: dict | None = None) -> str:
    """CSV text; ``comment`` becomes leading ``# key=value`` lines."""
    buf = io.StringIO()
    if comment:
        for k, v in comment.items():
            buf.write(f"# {k}={fmt(v) if not isinstance(v, str) else v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render(command: str, config: dict, header: Sequence[str], rows: list, fmt_name: str,
           extra: dict | None = None) -> str:
    """Render a table in CSV (with metadata comments) or JSON (list of row objects)."""
    if fmt_name == "csv":
        meta = {"program": "submodule-perturb", "version": __version__, "command": command}
        meta.update({k: v for k, v in config.items() if v is not None})
        return write_csv(header, rows, meta)
    data = {"columns": list(header), "rows": [dict(zip(header, r)) for r in rows]}
    if extra:
        data.update(extra)
    return write_json(command, config, data)
