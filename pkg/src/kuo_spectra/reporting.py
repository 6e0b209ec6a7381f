"""Deterministic report serialization.

Floats are written with 17 significant digits, infinities as the strings
"+inf" and "-inf", so that identical runs produce byte-identical files.
Report values carry a provenance tag saying where the number came from.
"""

import dataclasses
import json
import math
import os

import numpy as np

from .errors import ConfigError
from .extended import ExtendedReal

SOURCES = ("computed", "closed_form", "paper_constant")


def format_float(x):
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"+inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    if not any(ch in text for ch in ".e"):
        text += ".0"
    return text


def plain(obj):
    """Reduce records, numpy values and extended reals to JSON-ready Python data."""
    if isinstance(obj, ExtendedReal):
        return obj.to_json()
    if hasattr(obj, "to_json") and not isinstance(obj, type):
        return plain(obj.to_json())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps(obj, indent=2):
    """JSON text with fixed float formatting."""
    out = []

    def emit(v, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(v, dict):
            if not v:
                out.append("{}")
                return
            out.append("{\n")
            for i, (k, item) in enumerate(v.items()):
                out.append(f"{pad}{json.dumps(k)}: ")
                emit(item, level + 1)
                out.append(",\n" if i < len(v) - 1 else "\n")
            out.append(end + "}")
        elif isinstance(v, list):
            if not v:
                out.append("[]")
                return
            if all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in v):
                out.append("[" + ", ".join(_scalar(t) for t in v) + "]")
                return
            out.append("[\n")
            for i, item in enumerate(v):
                out.append(pad)
                emit(item, level + 1)
                out.append(",\n" if i < len(v) - 1 else "\n")
            out.append(end + "]")
        else:
            out.append(_scalar(v))
    emit(plain(obj), 0)
    return "".join(out) + "\n"


def _scalar(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, int):
        return str(v)
    return format_float(v)


def tag(value, source="computed"):
    """A value together with its provenance."""
    if source not in SOURCES:
        raise ValueError(f"unknown provenance source {source!r}")
    return {"value": plain(value), "source": source}


def ensure_dir(path):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}") from exc
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory {path} is not writable")
    return path


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))
    return path


def save_svg(fig, path, **kwargs):
    """Write a matplotlib figure as SVG with fixed element ids and no timestamp."""
    import matplotlib
    with matplotlib.rc_context({"svg.hashsalt": "kuo-spectra"}):
        fig.savefig(path, format="svg", metadata={"Date": None}, **kwargs)
    return path
