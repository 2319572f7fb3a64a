"""Ordered parallel map over search chunks.

Workers run in threads and must not change the flint working precision;
results come back in input order so merged outputs do not depend on the
worker count.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")

_logger = logging.getLogger(__name__)


def ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> list[R]:
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    n = min(workers, len(items))
    _logger.debug("parallel map: %d chunks on %d workers", len(items), n)
    with ThreadPoolExecutor(max_workers=n) as executor:
        return list(executor.map(fn, items))


def split_range(lo: int, hi: int, parts: int) -> list[tuple[int, int]]:
    """Split the inclusive range ``[lo, hi]`` into at most ``parts`` contiguous pieces."""
    if hi < lo:
        return []
    total = hi - lo + 1
    parts = max(1, min(parts, total))
    step, extra = divmod(total, parts)
    out: list[tuple[int, int]] = []
    start = lo
    for i in range(parts):
        size = step + (1 if i < extra else 0)
        out.append((start, start + size - 1))
        start += size
    return out
