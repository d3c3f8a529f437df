"""Deterministic chunked execution.

Work is cut into fixed-size chunks whose random streams are spawned from the
caller's seed by chunk index, so output never depends on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 8192


def worker_count() -> int:
    raw = os.environ.get("QSTAB_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def chunk_rngs(seed: int, n: int, chunk: int = CHUNK):
    """Yield ``(start, stop, Generator)`` triples covering ``range(n)``."""
    for k, start in enumerate(range(0, n, chunk)):
        ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(k,))
        yield start, min(start + chunk, n), np.random.Generator(np.random.Philox(ss))


def ordered_map(fn, items):
    """``list(map(fn, items))`` spread over ``QSTAB_THREADS`` threads."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
