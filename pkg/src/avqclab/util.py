"""Shared helpers that do not belong to any one analysis."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from .config import worker_count

# below this many items the thread pool costs more than it saves
_PARALLEL_MIN = 512


def parallel_map(fn, items):
    """Ordered map over ``items`` with the worker cap from AVQCLAB_THREADS.

    Results come back in input order, so downstream reductions are
    independent of scheduling; small batches run as a plain loop.
    """
    items = list(items)
    if worker_count() <= 1 or len(items) < _PARALLEL_MIN:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(fn, items))
