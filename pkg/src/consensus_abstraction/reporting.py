"""JSON serialization with 17 significant digits and the shipped report schemas."""
from __future__ import annotations

import json
import math
from importlib import resources

import numpy as np

SCHEMAS = ("abstraction", "measure", "verify", "partition", "simulation", "demo")


def _emit(obj, out, indent, level):
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," if indent else ", "
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append("null" if obj is None else ("true" if obj else "false"))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        out.append(format(x, ".17g") if math.isfinite(x) else "null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for k, (key, val) in enumerate(obj.items()):
            if k:
                out.append(sep)
            out.append(pad + json.dumps(str(key)) + ": ")
            _emit(val, out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        out.append("[")
        for k, val in enumerate(items):
            if k:
                out.append(sep)
            out.append(pad)
            _emit(val, out, indent, level + 1)
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text; floats carry 17 significant digits and non-finite floats become null."""
    out: list[str] = []
    _emit(obj, out, indent, 0)
    return "".join(out) + "\n"


def load_schema(kind: str) -> dict:
    if kind not in SCHEMAS:
        raise KeyError(f"unknown schema {kind!r}")
    text = resources.files(__package__).joinpath("schemas", f"{kind}_report.schema.json").read_text("utf-8")
    return json.loads(text)
