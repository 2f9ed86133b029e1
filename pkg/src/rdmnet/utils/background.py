"""Background loading that keeps results in submission order."""

import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(func: Callable[[T], R], items: Iterable[T], workers: int = 4) -> list[R]:
    """
    Apply ``func`` to ``items`` on worker threads and return results in input order.

    The first exception raised by ``func`` propagates once every earlier
    result has been collected; pending work is cancelled.

    Usage:
        tensors = ordered_map(load_tensor, sorted(paths), workers=4)

    Args:
        func: Callable run on each item (typically file I/O plus decoding)
        items: Inputs, consumed eagerly
        workers: Thread count; 1 or less runs inline
    """
    work = list(items)
    if workers <= 1 or len(work) <= 1:
        return [func(item) for item in work]

    logger.debug(f"Loading {len(work)} items on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(func, item) for item in work]
        try:
            return [future.result() for future in futures]
        except BaseException:
            for future in futures:
                future.cancel()
            raise
