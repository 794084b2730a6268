"""Order-preserving parallel map used by the evaluation harness."""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from typing import Any, TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def resolve_workers(workers: int | None = None) -> int:
    """Explicit value, else LUMINARK_WORKERS / config ``workers``, else 1."""
    if workers is None:
        from ..config import get_workers

        return get_workers()
    try:
        n = int(workers)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        logger.warning(f"Ignoring invalid worker count {workers!r}; running serially")
        return 1
    return max(1, n)


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """Map ``fn`` over ``items`` and return results in input order.

    With more than one worker the calls run in a process pool; ``fn`` and the
    items must then be picklable. Results never depend on the worker count.
    """
    seq = list(items)
    n_workers = min(resolve_workers(workers), max(1, len(seq)))
    if n_workers <= 1:
        return [fn(item) for item in seq]

    logger.debug(f"Dispatching {len(seq)} jobs to {n_workers} worker processes")
    chunksize = max(1, len(seq) // (n_workers * 4))
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        results: list[Any] = list(pool.map(fn, seq, chunksize=chunksize))
    return results
