"""Deterministic report serialization: canonical JSON with fixed float
precision, and a config hash embedded in every emitted document."""

from __future__ import annotations

import hashlib
import json
import math
from fractions import Fraction

import numpy as np

from . import __version__

__all__ = ["canonical_json", "config_hash", "wrap_report", "write_csv"]


def _normalize(obj):
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return float(f"{f:.12e}")
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, Fraction):
        return [obj.numerator, obj.denominator]
    if isinstance(obj, np.ndarray):
        return [_normalize(v) for v in obj.tolist()]
    return obj


def canonical_json(obj) -> str:
    """Stable text form: sorted keys, floats at 12 significant digits."""
    return json.dumps(_normalize(obj), sort_keys=True, separators=(",", ":"))


def config_hash(config_obj) -> str:
    return hashlib.sha256(canonical_json(config_obj).encode()).hexdigest()[:16]


def wrap_report(kind: str, config_obj, payload) -> dict:
    return {
        "kind": kind,
        "version": __version__,
        "config_hash": config_hash(config_obj),
        "config": _normalize(config_obj),
        "payload": _normalize(payload),
    }


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for cell in row:
                if isinstance(cell, float):
                    cells.append(f"{cell:.12e}")
                else:
                    cells.append(str(cell))
            fh.write(",".join(cells) + "\n")
