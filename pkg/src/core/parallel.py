"""
Process-pool fan-out for independent seeded work units
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import structlog

from .config import settings

T = TypeVar("T")
R = TypeVar("R")

logger = structlog.get_logger(__name__)


def map_units(worker: Callable[[T], R], units: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Apply a top-level worker to every unit, in order; serial when one worker is configured"""
    units = list(units)
    workers = workers or settings.workers
    if workers <= 1 or len(units) <= 1:
        return [worker(unit) for unit in units]
    logger.debug(f"Dispatching {len(units)} units to {workers} processes")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, units))
