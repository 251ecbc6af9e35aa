"""Artifact writers (PGM, CSV, JSON) and argument parsers."""
from __future__ import annotations

import json
import math
import os
from typing import List, Tuple

import numpy as np


def write_pgm(path: str, image: np.ndarray) -> None:
    """Binary PGM (P5, maxval 255) from a 2D uint8 array."""
    img = np.ascontiguousarray(image, dtype=np.uint8)
    if img.ndim != 2:
        raise ValueError("PGM image must be 2D")
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError("only maxval 255 is supported")
    pix = parts[4]
    return np.frombuffer(pix[: w * h], dtype=np.uint8).reshape(h, w)


def _clean(obj):
    """JSON-safe copy: numpy scalars/arrays to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    if isinstance(obj, int) and abs(obj) >= 2 ** 63:
        return str(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def parse_range(spec: str) -> Tuple[float, float, int]:
    """'lo:hi:n' -> (lo, hi, n)."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"range {spec!r} must look like lo:hi:n")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1 or hi < lo:
        raise ValueError(f"range {spec!r} needs lo <= hi and n >= 1")
    return lo, hi, n


def parse_floats(spec: str, count: int = None) -> List[float]:
    vals = [float(v) for v in spec.split(",")]
    if count is not None and len(vals) != count:
        raise ValueError(f"expected {count} comma-separated numbers, got {spec!r}")
    return vals


def parse_int_range(spec: str) -> List[int]:
    """'3:7' -> [3, 4, 5, 6, 7]."""
    lo, _, hi = spec.partition(":")
    lo_i = int(lo)
    hi_i = int(hi) if hi else lo_i
    if hi_i < lo_i:
        raise ValueError(f"bad integer range {spec!r}")
    return list(range(lo_i, hi_i + 1))
