"""
Reproducible replicate streams.

Replicates are processed in blocks of BLOCK_SIZE. The random stream of a
block depends only on (seed, stream tag, block index), and block results are
concatenated in block order, so results do not depend on the worker count.
"""
import logging

from concurrent.futures import ProcessPoolExecutor
from enum import IntEnum
from functools import partial
from typing import Callable, List, Tuple

import numpy as np

from .exceptions import ContractError


LOGGER = logging.getLogger(__name__)

BLOCK_SIZE = 1000


class Stream(IntEnum):
    LIMIT = 1
    DIEKER_YAKIR = 2
    GRID_ATTAINMENT = 3
    CAPACITY = 4
    BROWN_RESNICK = 5
    PILOT = 6
    TILT_LHS = 7
    TILT_RHS = 8
    RESOLVENT = 9
    NORMALIZATION = 10
    SIMULATE = 11


BlockFunction = Callable[[np.random.Generator, int], np.ndarray]


def block_sizes(n: int, block_size: int = BLOCK_SIZE) -> List[int]:
    full, rest = divmod(n, block_size)

    return [block_size] * full + ([rest] if rest else [])


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(int(stream), block))
    )


def _run_block(func: BlockFunction, task: Tuple[int, int, int, int]) -> np.ndarray:
    seed, stream, block, size = task

    return func(block_rng(seed, stream, block), size)


def map_blocks(
    func: BlockFunction, n: int, seed: int, stream: int, workers: int = 1
) -> np.ndarray:
    """
    Runs ``func(rng, size)`` over all blocks of n replicates and concatenates
    the per-replicate rows in block order.

    ``func`` must be picklable when workers > 1 (a module-level function or a
    functools.partial of one).
    """
    if n < 1:
        raise ContractError(f"replicate count must be positive, got {n}")
    if seed is None or seed < 0:
        raise ContractError(f"seed must be a non-negative integer, got {seed!r}")

    tasks = [
        (int(seed), int(stream), b, size) for b, size in enumerate(block_sizes(n))
    ]
    run = partial(_run_block, func)
    if workers <= 1 or len(tasks) == 1:
        results = [run(task) for task in tasks]
    else:
        LOGGER.debug("running %d blocks on %d workers", len(tasks), workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, tasks))

    return np.concatenate(results, axis=0)
