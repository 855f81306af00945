"""Worker-pool helpers for scanning candidate batches."""

from collections import deque
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Callable, Deque, Iterable, Iterator, Optional, TypeVar

from clonelab.config import settings

T = TypeVar("T")
R = TypeVar("R")


def map_batches(
    fn: Callable[[T], R],
    batches: Iterable[T],
    workers: Optional[int] = None,
) -> Iterator[R]:
    """
    Apply ``fn`` to every batch on a thread pool, yielding results in input order.

    At most ``2 * workers`` batches are in flight at any time, so lazily produced
    batch streams are never materialized in full.

    Args:
        fn: Pure function applied to each batch
        batches: Batch stream
        workers: Pool size; defaults to ``settings.pool_size()``

    Returns:
        Iterator over ``fn(batch)`` in the order the batches were produced
    """
    workers = workers or settings.pool_size()
    if workers <= 1:
        for batch in batches:
            yield fn(batch)
        return

    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="clonelab") as pool:
        pending: Deque["Future[R]"] = deque()
        for batch in batches:
            pending.append(pool.submit(fn, batch))
            if len(pending) >= 2 * workers:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()
