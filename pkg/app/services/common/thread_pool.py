import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from app.core.config import settings

T = TypeVar("T")
R = TypeVar("R")


class ThreadPoolService:
    def __init__(self, max_workers: int = 4):
        self.max_workers = max(1, max_workers)
        self.executor = None
        self._worker_state = threading.local()

    def get_executor(self) -> ThreadPoolExecutor:
        """Get thread pool instance, created on first use"""
        if self.executor is None:
            self.executor = ThreadPoolExecutor(max_workers=self.max_workers, thread_name_prefix="spintomo")
        return self.executor

    def in_worker(self) -> bool:
        """True on a thread that is currently running a pool task"""
        return getattr(self._worker_state, "active", False)

    def _run_in_worker(self, func: Callable[[T], R]) -> Callable[[T], R]:
        def run(item: T) -> R:
            self._worker_state.active = True
            try:
                return func(item)
            finally:
                self._worker_state.active = False

        return run

    def map_ordered(self, func: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """
        Evaluate func on every item; results come back in input order whatever the scheduling.

        Calls made from inside a pool task run inline: nested submissions to the same
        bounded pool would wait on workers that are themselves waiting.
        """
        items = list(items)
        if self.max_workers == 1 or len(items) <= 1 or self.in_worker():
            return [func(item) for item in items]
        return list(self.get_executor().map(self._run_in_worker(func), items))

    def shutdown(self):
        """Shutdown thread pool"""
        if self.executor is not None:
            self.executor.shutdown(wait=False)
            self.executor = None


# Global singleton instance
thread_pool_service = ThreadPoolService(max_workers=settings.THREAD_POOL_WORKERS)
