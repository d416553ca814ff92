"""Thread-pool helpers.

Hot loops are numba kernels compiled with ``nogil=True``, so plain threads
give real parallelism for them. Work is split into contiguous chunks and
results are merged in chunk order, which keeps outputs independent of the
worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")


def resolve_threads(threads: int | None) -> int:
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return threads


def chunk_bounds(n_items: int, n_chunks: int) -> list[tuple[int, int]]:
    n_chunks = max(1, min(n_chunks, n_items)) if n_items else 1
    step, extra = divmod(n_items, n_chunks)
    bounds = []
    start = 0
    for c in range(n_chunks):
        stop = start + step + (1 if c < extra else 0)
        bounds.append((start, stop))
        start = stop
    return bounds


def map_chunks(fn: Callable[[int, int], T], n_items: int, threads: int | None) -> list[T]:
    """Apply ``fn(start, stop)`` over ``threads`` contiguous chunks of ``range(n_items)``.

    Results come back in chunk order regardless of completion order.
    """
    threads = resolve_threads(threads)
    bounds = chunk_bounds(n_items, threads)
    if len(bounds) == 1:
        return [fn(*bounds[0])]
    with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))
