"""Ordered map over independent work items, optionally threaded.

``IOCERT_THREADS`` caps the worker count (default 1, i.e. serial). Results
always come back in input order so reductions stay deterministic.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    try:
        return max(1, int(os.environ.get("IOCERT_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(func, items):
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
