"""Seeded generators for the random word-array and permutation models.

Every generator is built from a counter-based Philox bit generator keyed by a
``SeedSpec``, so a trial's output depends only on its seed and stream index and
never on how trials are spread over workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from multiprocessing import Pool
from typing import Callable, Iterator, Sequence, TypeVar

import numpy as np
from loguru import logger

from .config import TRIAL_BLOCK_SIZE, TUPLE_CHUNK_ELEMENTS
from .core import ArrayKind, ParameterError, PermArray, WordArray

T = TypeVar("T")
R = TypeVar("R")

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedSpec:
    """A 64-bit seed plus the stream index of one derived generator."""

    seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_index"):
            value = getattr(self, name)
            if not 0 <= value <= _MASK64:
                raise ParameterError(f"{name} must be an unsigned 64-bit integer, got {value}.")

    def child(self, *keys: int) -> SeedSpec:
        """Derive a sibling stream keyed by ``keys`` (e.g. a k value and a block index)."""
        mixed = np.random.SeedSequence(entropy=[self.stream_index, *keys]).generate_state(
            1, dtype=np.uint64
        )
        return SeedSpec(self.seed, int(mixed[0]))

    def generator(self) -> np.random.Generator:
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.Philox(sequence))


def _check_shape(n: int, k: int) -> None:
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}.")
    if k < 0:
        raise ParameterError(f"k must be >= 0, got {k}.")


def word_cells(rng: np.random.Generator, shape: tuple[int, ...], q: int) -> np.ndarray:
    """I.i.d. uniform symbols of ``shape``; trailing axes are (k, n)."""
    return rng.integers(0, q, size=shape, dtype=np.int64)


def perm_cells(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Independent uniform permutations of 1..n along the last axis of ``shape``."""
    if 0 in shape:
        return np.zeros(shape, dtype=np.int64)
    base = np.broadcast_to(np.arange(1, shape[-1] + 1, dtype=np.int64), shape)
    return rng.permuted(base, axis=-1)


def batch_sizes(size: int, k: int, n: int) -> list[int]:
    """Split ``size`` trials so no batch holds more than TUPLE_CHUNK_ELEMENTS cells."""
    step = max(1, TUPLE_CHUNK_ELEMENTS // max(1, k * n))
    return [min(step, size - start) for start in range(0, size, step)]


def trial_cells(
    rng: np.random.Generator, kind: ArrayKind, q: int | None, n: int, k: int, size: int
) -> Iterator[np.ndarray]:
    """Draw ``size`` random k x n arrays from ``rng`` as consecutive (batch, k, n) tensors."""
    for batch in batch_sizes(size, k, n):
        if kind is ArrayKind.WORDS:
            yield word_cells(rng, (batch, k, n), q)  # type: ignore[arg-type]
        else:
            yield perm_cells(rng, (batch, k, n))


def gen_word_array(n: int, k: int, q: int, seed: SeedSpec) -> WordArray:
    _check_shape(n, k)
    if q < 2:
        raise ParameterError(f"Alphabet size q must be >= 2, got {q}.")
    cells = word_cells(seed.generator(), (k, n), q)
    return WordArray(q=q, cells=cells)


def gen_perm_array(n: int, k: int, seed: SeedSpec) -> PermArray:
    """Each row an independent Fisher-Yates shuffle of 1..n."""
    _check_shape(n, k)
    return PermArray(cells=perm_cells(seed.generator(), (k, n)))


def rank_rows(uniforms: np.ndarray) -> np.ndarray:
    """Replace each row of reals by the ranks (1..n) of its entries."""
    uniforms = np.atleast_2d(np.asarray(uniforms, dtype=float))
    return np.argsort(np.argsort(uniforms, axis=1, kind="stable"), axis=1) + 1


def gen_perm_array_order_stats(n: int, k: int, seed: SeedSpec) -> PermArray:
    """Rank k groups of n i.i.d. uniforms; a row with a tie is drawn again."""
    _check_shape(n, k)
    rng = seed.generator()
    uniforms = rng.random((k, n))
    while True:
        ordered = np.sort(uniforms, axis=1)
        tied = np.flatnonzero((np.diff(ordered, axis=1) == 0).any(axis=1))
        if not tied.size:
            break
        logger.debug(f"Resampling {tied.size} tied row(s) in order-statistics generator")
        uniforms[tied] = rng.random((tied.size, n))
    return PermArray(cells=rank_rows(uniforms).reshape(k, n))


def block_plan(trials: int, block_size: int = TRIAL_BLOCK_SIZE) -> list[tuple[int, int]]:
    """(block_index, size) pairs covering ``trials``; independent of the worker count."""
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}.")
    return [
        (index, min(block_size, trials - start))
        for index, start in enumerate(range(0, trials, block_size))
    ]


def map_blocks(fn: Callable[[T], R], tasks: Sequence[T], workers: int = 1) -> list[R]:
    """Apply ``fn`` to every task, in order, on up to ``workers`` processes."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with Pool(processes=min(workers, len(tasks))) as pool:
        return pool.map(fn, tasks)
