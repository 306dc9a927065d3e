"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Deterministic worker pool shared by the field assembly, the Monte Carlo
sampler and the collision probes.

Work is split into index-addressed tasks whose results are written back by
index, so the output never depends on scheduling or on the worker count.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from kinetic_hypo.config.logging import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")

_DEFAULT_WORKERS = 1


def set_default_workers(workers: int) -> None:
    """Set the worker count used when callers pass ``workers=None``."""
    global _DEFAULT_WORKERS
    _DEFAULT_WORKERS = max(1, int(workers))
    logger.debug(f"Default worker count set to {_DEFAULT_WORKERS}")


def get_default_workers() -> int:
    return _DEFAULT_WORKERS


def ordered_map(
    func: Callable[[T], R], items: Sequence[T], workers: int = None
) -> List[R]:
    """
    Apply ``func`` to every item and return the results in input order.

    Args:
        func: Pure function of one item.
        items: Work items.
        workers: Thread count; ``None`` uses the module default.

    Returns:
        List of results aligned with ``items``.
    """
    n_workers = get_default_workers() if workers is None else max(1, int(workers))
    if n_workers == 1 or len(items) <= 1:
        return [func(item) for item in items]

    results: List[R] = [None] * len(items)
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        futures = {pool.submit(func, item): i for i, item in enumerate(items)}
        for future, index in futures.items():
            results[index] = future.result()
    return results
