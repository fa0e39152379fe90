"""
Deterministic random streams.

Every draw and every test owns a substream derived from the global seed, so results
do not depend on how work is split across workers.
"""

import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def draw_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for draw ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def substream(seed: int, label: str) -> np.random.Generator:
    """Generator owned by a named task (test id, route name)."""
    key = zlib.crc32(label.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))


def _run_chunk(fn: Callable[[Any, np.random.Generator], Any], payload: Any,
               seed: int, indices: Sequence[int]) -> List[Any]:
    return [fn(payload, draw_rng(seed, i)) for i in indices]


def _chunks(count: int, parts: int) -> List[range]:
    step = -(-count // parts)
    return [range(start, min(start + step, count)) for start in range(0, count, step)]


def run_draws(fn: Callable[[Any, np.random.Generator], Any], payload: Any,
              count: int, seed: int, workers: int = 1) -> List[Any]:
    """
    Evaluate ``fn(payload, rng_i)`` for i in 0..count-1 with per-draw substreams.

    Args:
        fn: Module-level (picklable) function of a payload and a generator
        payload: Picklable parameters shared by all draws
        count: Number of draws
        seed: Run seed
        workers: Process count; results are identical for any value

    Returns:
        Results in draw-index order
    """
    if count <= 0:
        return []
    if workers <= 1 or count < 2 * workers:
        return _run_chunk(fn, payload, seed, range(count))

    chunks = _chunks(count, workers * 4)
    logger.debug(f"Dispatching {count} draws in {len(chunks)} chunks to {workers} workers")
    results: List[Any] = []
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(_run_chunk, fn, payload, seed, chunk) for chunk in chunks]
        for future in futures:
            results.extend(future.result())
    return results
