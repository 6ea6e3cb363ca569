"""Worker pool plumbing: ordered results regardless of completion order."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

ENV_THREADS = "IONKICK_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    """Explicit value, else ``IONKICK_THREADS``, else available CPUs."""
    if threads is None:
        env = os.environ.get(ENV_THREADS)
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ValueError(f"{ENV_THREADS} must be an integer, got {env!r}") from None
        else:
            threads = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count()
    if threads < 1:
        raise ValueError("thread count must be at least 1")
    return threads


def ordered_map(fn, items, threads: int = 1) -> list:
    """``[fn(x) for x in items]``, fanned out over processes when threads > 1."""
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    workers = min(threads, len(items))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
