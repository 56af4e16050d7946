"""Ordered fan-out of independent sweep points.

Compiled kernels release the GIL, so a thread pool gives real parallelism
without pickling states across processes.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(requested=None):
    if requested is None:
        try:
            requested = int(os.environ.get("BJJ_THREADS", "0") or 0)
        except ValueError:
            requested = 0
    if requested <= 0:
        requested = os.cpu_count() or 1
    return requested


def map_ordered(fn, items, workers=None):
    """``[fn(x) for x in items]``, possibly concurrent; output keeps input order."""
    items = list(items)
    n = min(worker_count(workers), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
