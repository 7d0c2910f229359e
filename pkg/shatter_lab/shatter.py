"""Shattering checks for word arrays and permutation families.

A column t-tuple is shattered when the rows restricted to it show every one of
the ``arity`` symbols (q^t words or t! patterns). Tuples are scanned in
lexicographic order, in numpy chunks whose size is bounded by
``TUPLE_CHUNK_ELEMENTS``; within a chunk every row of every tuple is encoded at
once and the distinct ids per tuple are counted after a sort.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from loguru import logger

from .config import DEFAULT_WITNESS_CAP, EXACT_DISJOINT_LIMIT, TUPLE_CHUNK_ELEMENTS
from .core import (
    ArrayKind,
    ColumnTuple,
    ParameterError,
    PermArray,
    ShatterArray,
    WordArray,
    encode_patterns,
    encode_words,
)
from .models import CoverageReport
from .randgen import SeedSpec

Encoder = Callable[[np.ndarray], np.ndarray]


class CapacityError(RuntimeError):
    """Raised when an exhaustive search is asked to handle too many tuples."""


@dataclass(frozen=True, eq=False)
class PresenceSet:
    """Which of the ``arity`` words or patterns occur on one column tuple."""

    t: int
    arity: int
    bits: np.ndarray

    @property
    def popcount(self) -> int:
        return int(np.count_nonzero(self.bits))

    @property
    def full(self) -> bool:
        return self.popcount == self.arity

    def members(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.bits)]


@dataclass(frozen=True, slots=True)
class AtLeast:
    """VC dimension lower bound when no unshattered tuple was found up to ``bound - 1``."""

    bound: int

    def __str__(self) -> str:
        return f"≥ {self.bound}"


def encoder_for(kind: ArrayKind, q: int | None = None) -> Encoder:
    if kind is ArrayKind.WORDS:
        if q is None:
            raise ParameterError("Word encoding needs an alphabet size q.")
        return lambda sub: encode_words(sub, q)
    return encode_patterns


def _resolve(arr: ShatterArray, t: int, kind: ArrayKind | str | None) -> int:
    if kind is not None and ArrayKind(kind) is not arr.kind:
        raise ParameterError(
            f"Array of kind '{arr.kind.value}' checked as '{ArrayKind(kind).value}'."
        )
    if not 1 <= t <= arr.n:
        raise ParameterError(f"t must lie in 1..n={arr.n}, got {t}.")
    return arr.arity(t)


def tuple_chunks(n: int, t: int, size: int) -> Iterator[np.ndarray]:
    """Yield all 0-based t-subsets of range(n) in lexicographic order, ``size`` per chunk."""
    combos = itertools.combinations(range(n), t)
    while True:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, size)), dtype=np.int64
        )
        if not flat.size:
            return
        yield flat.reshape(-1, t)


def chunk_size(batch: int, k: int, t: int) -> int:
    return max(1, TUPLE_CHUNK_ELEMENTS // max(1, batch * k * t))


def unshattered_mask(
    cells: np.ndarray, tuples: np.ndarray, encode: Encoder, arity: int
) -> np.ndarray:
    """cells (..., k, n) and 0-based tuples (T, t) -> bool (..., T), True where unshattered."""
    k = cells.shape[-2]
    if k < arity:
        return np.ones(cells.shape[:-2] + (len(tuples),), dtype=bool)
    ids = encode(cells[..., tuples])
    ids = np.sort(np.moveaxis(ids, -2, -1), axis=-1)
    distinct = 1 + np.count_nonzero(np.diff(ids, axis=-1), axis=-1)
    return distinct < arity


def presence(arr: ShatterArray, cols: ColumnTuple) -> PresenceSet:
    cols.check_within(arr.n)
    arity = arr.arity(cols.t)
    ids = arr.encode(arr.cells[:, list(cols.zero_based)])
    bits = np.zeros(arity, dtype=bool)
    bits[ids] = True
    return PresenceSet(t=cols.t, arity=arity, bits=bits)


def words_present(arr: WordArray, cols: ColumnTuple) -> PresenceSet:
    return presence(arr, cols)


def patterns_present(arr: PermArray, cols: ColumnTuple) -> PresenceSet:
    return presence(arr, cols)


def _greedy_extend(hits: np.ndarray, used: np.ndarray) -> int:
    picked = 0
    while hits.size and np.count_nonzero(~used) >= hits.shape[1]:
        free = np.flatnonzero(~used[hits].any(axis=1))
        if not free.size:
            break
        used[hits[free[0]]] = True
        picked += 1
        hits = hits[free[0] + 1 :]
    return picked


def count_unshattered(
    arr: ShatterArray,
    t: int,
    kind: ArrayKind | str | None = None,
    *,
    witness_cap: int = DEFAULT_WITNESS_CAP,
    collect_witnesses: bool = True,
) -> CoverageReport:
    arity = _resolve(arr, t, kind)
    n, k = arr.n, arr.k
    cap = witness_cap if collect_witnesses else 0

    if k < arity:
        # Pigeonhole: every tuple misses a symbol, and first-fit takes consecutive blocks.
        x_count = math.comb(n, t)
        witnesses = list(itertools.islice(itertools.combinations(range(1, n + 1), t), cap))
        y_greedy = n // t
    else:
        x_count = 0
        y_greedy = 0
        witnesses = []
        used = np.zeros(n, dtype=bool)
        for chunk in tuple_chunks(n, t, chunk_size(1, k, t)):
            hits = chunk[unshattered_mask(arr.cells, chunk, arr.encode, arity)]
            if not hits.size:
                continue
            x_count += len(hits)
            room = cap - len(witnesses)
            if room > 0:
                witnesses.extend(tuple(int(c) + 1 for c in row) for row in hits[:room])
            y_greedy += _greedy_extend(hits, used)

    truncated = x_count > len(witnesses) and collect_witnesses
    if truncated:
        logger.warning(f"Witness list capped at {cap} of {x_count} unshattered {t}-tuples")
    return CoverageReport(
        kind=arr.kind,
        t=t,
        n=n,
        k=k,
        x_count=x_count,
        y_greedy=y_greedy,
        witnesses=witnesses,
        witnesses_truncated=truncated,
    )


def first_unshattered(arr: ShatterArray, t: int) -> ColumnTuple | None:
    arity = _resolve(arr, t, None)
    if arr.k < arity:
        return ColumnTuple(tuple(range(1, t + 1)))
    for chunk in tuple_chunks(arr.n, t, chunk_size(1, arr.k, t)):
        hits = np.flatnonzero(unshattered_mask(arr.cells, chunk, arr.encode, arity))
        if hits.size:
            return ColumnTuple.from_zero_based(chunk[hits[0]])
    return None


def is_covering(arr: ShatterArray, t: int, kind: ArrayKind | str | None = None) -> bool:
    _resolve(arr, t, kind)
    return first_unshattered(arr, t) is None


def sample_unshattered(
    arr: ShatterArray, t: int, samples: int, seed: SeedSpec
) -> ColumnTuple | None:
    """Check ``samples`` uniformly random t-tuples and return the first unshattered one."""
    arity = _resolve(arr, t, None)
    if samples <= 0:
        return None
    rng = seed.generator()
    tuples = np.sort(np.argsort(rng.random((samples, arr.n)), axis=1)[:, :t], axis=1)
    step = chunk_size(1, arr.k, t)
    for start in range(0, samples, step):
        chunk = tuples[start : start + step]
        hits = np.flatnonzero(unshattered_mask(arr.cells, chunk, arr.encode, arity))
        if hits.size:
            return ColumnTuple.from_zero_based(chunk[hits[0]])
    return None


def vc_dimension(
    arr: ShatterArray,
    kind: ArrayKind | str | None = None,
    t_max: int | None = None,
    *,
    samples: int = 0,
    seed: SeedSpec | None = None,
) -> int | AtLeast:
    """Size of the smallest unshattered column tuple, searched up to ``t_max``.

    With ``samples`` > 0 each size is first sampled at random; the exhaustive
    early-exit scan only runs when sampling finds nothing.
    """
    t_max = arr.n if t_max is None else t_max
    if not 1 <= t_max <= arr.n:
        raise ParameterError(f"t_max must lie in 1..n={arr.n}, got {t_max}.")
    _resolve(arr, 1, kind)
    seed = seed or SeedSpec(0)
    for t in range(1, t_max + 1):
        if samples and sample_unshattered(arr, t, samples, seed.child(t)) is not None:
            logger.debug(f"Random sampling found an unshattered {t}-tuple")
            return t
        if first_unshattered(arr, t) is not None:
            return t
    return AtLeast(t_max + 1)


def exact_max_disjoint_unshattered(
    arr: ShatterArray,
    t: int,
    kind: ArrayKind | str | None = None,
    *,
    limit: int = EXACT_DISJOINT_LIMIT,
) -> int:
    """Maximum number of pairwise-disjoint unshattered t-tuples (Y), by branch and bound."""
    report = count_unshattered(arr, t, kind, witness_cap=limit + 1)
    if report.x_count > limit:
        raise CapacityError(
            f"{report.x_count} unshattered tuples exceed the exact-search limit of {limit}; "
            f"greedy value is {report.y_greedy}."
        )
    sets = [frozenset(w) for w in report.witnesses]
    best = report.y_greedy

    def branch(start: int, taken: frozenset[int], size: int) -> None:
        nonlocal best
        best = max(best, size)
        for i in range(start, len(sets)):
            bound = size + min(len(sets) - i, (arr.n - len(taken)) // t)
            if bound <= best:
                return
            if taken.isdisjoint(sets[i]):
                branch(i + 1, taken | sets[i], size + 1)

    branch(0, frozenset(), 0)
    return best
