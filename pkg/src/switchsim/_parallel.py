"""Worker-count control shared by the scan and the optimizer."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    """Thread cap from ``SWITCHSIM_THREADS``; 1 when unset or malformed."""
    try:
        return max(1, int(os.environ.get("SWITCHSIM_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """``list(map(fn, items))``, on a thread pool when more than one worker is allowed."""
    items = list(items)
    n = workers or worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(n) as pool:
        return list(pool.map(fn, items))
