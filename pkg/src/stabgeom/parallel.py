"""Order-preserving replica map over worker processes."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable


def map_ordered(fn: Callable, items: Iterable, threads: int = 1, chunksize: int = 4) -> list:
    """``[fn(i) for i in items]``, optionally spread over ``threads`` processes.

    Results come back in input order, so any reduction done by the caller is
    independent of the worker count.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
