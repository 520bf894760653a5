"""Deterministic worker-pool helper for independent runs."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "NONLOCAL_CLAW_THREADS"


def worker_count(n_tasks: int) -> int:
    """Pool size for n_tasks independent runs, capped by the environment.

    Defaults to serial execution; setting NONLOCAL_CLAW_THREADS raises the
    cap.  Results never depend on the pool size because tasks are
    independent and collected in index order.
    """
    cap = os.environ.get(ENV_THREADS, "")
    try:
        cap_val = max(1, int(cap)) if cap else 1
    except ValueError:
        cap_val = 1
    return max(1, min(cap_val, n_tasks))


def run_indexed(fn, items):
    """Map fn over items, preserving order, with an optional thread pool."""
    items = list(items)
    workers = worker_count(len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
