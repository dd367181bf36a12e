"""Deterministic replica-parallel map.

Replicas are split into fixed chunks (even-sized, so the two replicas that
share one synthesis block land in the same chunk). Chunk results are
concatenated in replica order, so the output does not depend on the number
of threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

CHUNK = 64


def chunks(n: int, size: int = CHUNK) -> list[range]:
    size = max(2, size + size % 2)
    return [range(a, min(a + size, n)) for a in range(0, n, size)]


def replica_map(fn: Callable[[range], np.ndarray], n: int, threads: int = 1,
                size: int = CHUNK) -> np.ndarray:
    """Apply ``fn`` to replica chunks and stack the ``(len(chunk), k)`` results in order."""
    parts = chunks(n, size)
    if threads <= 1 or len(parts) == 1:
        results = [fn(c) for c in parts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(fn, parts))
    return np.concatenate([np.asarray(r).reshape(len(c), -1) for r, c in zip(results, parts)])
