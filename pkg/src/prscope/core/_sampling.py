from __future__ import annotations

import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

logger = logging.getLogger(__name__)

# draw(count, rng) -> array whose first axis has length count
Draw = Callable[[int, np.random.Generator], npt.NDArray]


@dataclass(frozen=True)
class ShardPlan:
    """
    Contiguous split of ``trials`` into ``shards`` ranges.

    >>> ShardPlan(10, 3).sizes
    [4, 3, 3]
    """

    trials: int
    shards: int = 1

    @property
    def sizes(self) -> list[int]:
        shards = max(1, min(self.shards, self.trials))
        base, extra = divmod(self.trials, shards)
        return [base + (i < extra) for i in range(shards)]


def monte_carlo(
    draw: Draw,
    trials: int,
    rng: np.random.Generator,
    *,
    shards: int = 1,
    threads: int | None = None,
) -> npt.NDArray:
    """
    Per-trial values of ``draw`` over ``trials`` trials.

    Each shard owns one child stream of ``rng`` and the shard results are
    concatenated in shard order, so the outcome only depends on the seed and
    the shard count, never on ``threads``.
    """
    sizes = ShardPlan(trials, shards).sizes
    streams = rng.spawn(len(sizes))
    logger.debug("running %d trials in %d shard(s) on %s thread(s)", trials, len(sizes), threads or 1)
    if threads is None or threads <= 1 or len(sizes) == 1:
        parts = [draw(size, stream) for size, stream in zip(sizes, streams, strict=True)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            parts = list(executor.map(draw, sizes, streams))
    return np.concatenate(parts, axis=0)


def mean_stderr(values: npt.ArrayLike) -> tuple[float, float]:
    """
    Sample mean and plug-in standard error.

    >>> mean, stderr = mean_stderr([1.0, 2.0, 3.0])
    >>> mean, round(stderr, 6)
    (2.0, 0.57735)
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:  # noqa: PLR2004
        return float(np.mean(values)), 0.0
    return float(np.mean(values)), float(np.std(values, ddof=1) / np.sqrt(values.size))
