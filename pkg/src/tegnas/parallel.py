"""Deterministic fan-out helper.

Tasks must be pure (split any RNG before submitting); results merge by
input index, so the output is identical for any thread count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def resolve_threads(requested=None) -> int:
    """CLI flag wins, then TEGNAS_THREADS, then 1."""
    if requested is not None:
        n = int(requested)
    else:
        n = int(os.environ.get("TEGNAS_THREADS", "1"))
    if n < 1:
        raise ValueError(f"thread count must be >= 1, got {n}")
    return n


def parallel_map(fn, items, threads: int = 1) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
