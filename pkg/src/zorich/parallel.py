"""Row-block worker pool with deterministic, row-ordered assembly."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

#: Rows per job; fixed so that the work split does not depend on the worker count.
BLOCK_ROWS = 16


def worker_count(default: int = 1) -> int:
    """Worker count from ZORICH_THREADS (>= 1)."""
    raw = os.environ.get("ZORICH_THREADS")
    if not raw:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"ZORICH_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise ValueError("ZORICH_THREADS must be >= 1")
    return n


def map_rows(func: Callable, n_rows: int, workers: int = 1, block: int = BLOCK_ROWS):
    """Apply ``func(slice)`` to consecutive row blocks and concatenate in row order.

    ``func`` returns an array or a tuple of arrays; results are joined
    along axis 0 in block order, so the output is independent of
    ``workers``.
    """
    blocks = [slice(i, min(i + block, n_rows)) for i in range(0, n_rows, block)]
    if workers <= 1:
        parts = [func(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(func, blocks))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate([p[i] for p in parts]) for i in range(len(parts[0])))
    return np.concatenate(parts)
