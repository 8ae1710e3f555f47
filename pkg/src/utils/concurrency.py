from typing import Callable, Iterable, List, TypeVar
from src.config.worker_pool import WorkerPool
import threading

T = TypeVar("T")
R = TypeVar("R")

_state = threading.local()


def _in_worker() -> bool:
    return getattr(_state, "in_worker", False)


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Apply fn to every item, results in input order whatever the thread count.

    Calls made from inside a pool worker run serially; nested pool use would deadlock.
    """
    items = list(items)
    executor = WorkerPool.get_executor()
    if executor is None or len(items) < 2 or _in_worker():
        return [fn(item) for item in items]

    def run(item):
        _state.in_worker = True
        try:
            return fn(item)
        finally:
            _state.in_worker = False

    return list(executor.map(run, items))
