"""Shared helper for independent sweep cells.

WOLBACHIA_THREADS caps the worker count; unset or <= 1 runs serially.
Results keep the input order either way, so sweeps stay deterministic.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["sweep_map", "sweep_workers"]


def sweep_workers() -> int:
    raw = os.environ.get("WOLBACHIA_THREADS", "").strip()
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def sweep_map(fn, items) -> list:
    items = list(items)
    workers = sweep_workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
