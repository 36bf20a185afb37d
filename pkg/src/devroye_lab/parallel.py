"""Schedule-independent parallel helpers.

Work is split into fixed-size chunks keyed by index; chunks may be
evaluated on a thread pool but are always reassembled in chunk order, so
results do not depend on the thread count.  The pool size is capped by the
DEVROYE_LAB_THREADS environment variable (default 1: plain loop).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

CHUNK = 64  # replicas per chunk; fixed so reduction order never changes


def thread_count() -> int:
    raw = os.environ.get("DEVROYE_LAB_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def chunk_ranges(n_items: int, chunk: int = CHUNK):
    return [(lo, min(lo + chunk, n_items)) for lo in range(0, n_items, chunk)]


def map_chunks(fn, n_items: int, chunk: int = CHUNK) -> list:
    """Apply fn(lo, hi) to every chunk; return results in chunk order.

    fn must be pure.  With DEVROYE_LAB_THREADS > 1 the chunks run on a
    thread pool; the returned list is identical either way.
    """
    ranges = chunk_ranges(n_items, chunk)
    workers = thread_count()
    if workers <= 1 or len(ranges) <= 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, lo, hi) for lo, hi in ranges]
        return [f.result() for f in futures]
