"""Deterministic text output: 17-significant-digit floats, JSON, provenance."""

from __future__ import annotations

import hashlib
import json
import math
from datetime import datetime, timezone

import numpy as np

from . import __version__

DIGITS = 17


def fmt(x) -> str:
    """Format a number with exactly 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "NaN" if math.isnan(x) else ("Infinity" if x > 0 else "-Infinity")
    if x == 0.0:
        return "0." + "0" * (DIGITS - 1)
    s = f"{x:.{DIGITS - 1}e}"
    e = int(s.split("e")[1])
    if -5 <= e < DIGITS - 1:
        return f"{x:.{DIGITS - 1 - e}f}"
    return s


def dumps(obj, indent: int = 2) -> str:
    """JSON with every float printed by ``fmt``."""
    return _emit(obj, 0, indent) + "\n"


def _emit(obj, level, indent) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_emit(str(k), 0, indent)}: {_emit(v, level + 1, indent)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in seq):
            return "[" + ", ".join(_emit(v, 0, indent) for v in seq) + "]"
        items = [pad + _emit(v, level + 1, indent) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def sha256_text(text: str | bytes) -> str:
    if isinstance(text, str):
        text = text.encode("utf-8")
    return hashlib.sha256(text).hexdigest()


def provenance(input_hash: str, config_hash: str, reproducible: bool, config: dict | None = None) -> dict:
    out = {"tool": "jsdiff", "version": __version__, "input_sha256": input_hash,
           "config_sha256": config_hash}
    if config is not None:
        out["config"] = config
    if not reproducible:
        out["timestamp"] = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return out


def comment_header(prov: dict, prefix: str = "# ") -> str:
    return "".join(f"{prefix}{k}: {json.dumps(v, sort_keys=True) if isinstance(v, dict) else v}\n"
                   for k, v in prov.items())
