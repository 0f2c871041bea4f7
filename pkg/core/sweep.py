import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import env
from core.errors import AssumptionViolation, ModelError

logger = logging.getLogger(__name__)

thread_pool = ThreadPoolExecutor(max_workers=env.SWEEP_THREAD)

T = TypeVar("T")
R = TypeVar("R")


def _labelled(fn: Callable[[T], R], label: str) -> Callable[[T], R]:
    def run(value: T) -> R:
        try:
            return fn(value)
        except AssumptionViolation as e:
            raise AssumptionViolation(f"{label}={value}: {e}", e.report) from e
        except ModelError as e:
            raise type(e)(f"{label}={value}: {e}") from e

    return run


def run_sweep(fn: Callable[[T], R], values: Iterable[T], label: str = "value") -> list[R]:
    """Evaluate `fn` at every sweep value on the worker pool, results in input order"""
    values = list(values)
    logger.debug("evaluating %d sweep points on %d threads", len(values), env.SWEEP_THREAD)

    return list(thread_pool.map(_labelled(fn, label), values))
