import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor, as_completed

from django.conf import settings

logger = logging.getLogger(__name__)


def run_tasks(fn: Callable, keys: Iterable, threads: int | None = None) -> list[tuple]:
    """
    Evaluate fn on every work-item key with a bounded thread pool.

    Results come back as (key, result) pairs sorted by key, so aggregation
    does not depend on completion order. The first failure is re-raised.
    """
    keys = list(keys)
    threads = threads or settings.RCM_LAB_THREADS
    if threads <= 1 or len(keys) <= 1:
        results = [(key, fn(key)) for key in keys]
    else:
        logger.debug(f"Running {len(keys)} tasks on {threads} threads")
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {pool.submit(fn, key): key for key in keys}
            results = [(futures[f], f.result()) for f in as_completed(futures)]
    return sorted(results, key=lambda pair: pair[0])
