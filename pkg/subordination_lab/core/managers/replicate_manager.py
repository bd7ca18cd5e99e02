"""
Replicate manager: runs independent replicates on a worker pool.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from subordination_lab.constants import DEFAULT_THREADS
from subordination_lab.exceptions import ParameterError

logger = logging.getLogger(__name__)

T = TypeVar('T')


class ReplicateManager:
    """
    Distributes replicate work across threads.

    Results always come back in input order, so a fold over them does not
    depend on the thread count. Each replicate must draw from its own stream.
    """

    def __init__(self, threads: int = DEFAULT_THREADS):
        if threads < 1:
            raise ParameterError(f"threads must be at least 1, got {threads}")
        self.threads = threads

    def map(self, fn: Callable[[int], T], items: Iterable[int]) -> List[T]:
        """
        Apply fn to every item

        Args:
            fn: Work for one replicate
            items: Replicate indices (or any other inputs)

        Returns:
            List of results in the order of items
        """
        items = list(items)
        if self.threads == 1 or len(items) < 2:
            return [fn(item) for item in items]

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(fn, items))

    def run(self, fn: Callable[[int], T], count: int) -> List[T]:
        """fn(0), ..., fn(count - 1)."""
        logger.debug(f"running {count} replicates on {self.threads} thread(s)")
        return self.map(fn, range(count))
