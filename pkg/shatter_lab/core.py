"""Domain types and pattern encodings shared by every other module.

Column indices are 1-based at every public boundary (``ColumnTuple``, files,
reports) and 0-based inside numpy code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, Iterable, Sequence, Union

import numpy as np

from .config import MAX_PATTERN_LENGTH


class InvalidInputError(ValueError):
    """Raised when a value violates a domain invariant (duplicates, bad symbols)."""


class RangeError(ValueError):
    """Raised when a size parameter lies outside the supported range."""


class ParameterError(ValueError):
    """Raised for inconsistent generator or engine parameters."""


class ArrayKind(str, Enum):
    """The two random models: q-ary word arrays and permutation families."""

    WORDS = "words"
    PERMS = "perms"


def _check_pattern_length(t: int) -> None:
    if not 1 <= t <= MAX_PATTERN_LENGTH:
        raise RangeError(f"Pattern length {t} outside 1..{MAX_PATTERN_LENGTH}.")


@dataclass(frozen=True, slots=True)
class PatternId:
    """Lehmer-code rank of a permutation of {1..t}; identity is 0."""

    t: int
    id: int

    def __post_init__(self) -> None:
        _check_pattern_length(self.t)
        if not 0 <= self.id < math.factorial(self.t):
            raise InvalidInputError(f"Pattern id {self.id} outside 0..{self.t}!-1.")


def encode_patterns(sub: np.ndarray) -> np.ndarray:
    """Vectorised Lehmer rank over the last axis; entries along it must be distinct."""
    sub = np.asarray(sub)
    t = sub.shape[-1]
    ids = np.zeros(sub.shape[:-1], dtype=np.int64)
    for i in range(t - 1):
        smaller = (sub[..., i + 1 :] < sub[..., i : i + 1]).sum(axis=-1)
        ids += smaller * math.factorial(t - 1 - i)
    return ids


def encode_words(sub: np.ndarray, q: int) -> np.ndarray:
    """Vectorised radix-q index over the last axis, most significant symbol first."""
    sub = np.asarray(sub, dtype=np.int64)
    t = sub.shape[-1]
    weights = q ** np.arange(t - 1, -1, -1, dtype=np.int64)
    return sub @ weights


def pattern_id(values: Sequence[float]) -> PatternId:
    """Return the pattern order-isomorphic to ``values``."""
    t = len(values)
    _check_pattern_length(t)
    if len(set(values)) != t:
        raise InvalidInputError(f"Pattern values must be pairwise distinct, got {tuple(values)}.")
    return PatternId(t=t, id=int(encode_patterns(np.asarray(values))))


def decode_pattern(pid: PatternId) -> tuple[int, ...]:
    remaining = list(range(1, pid.t + 1))
    rank = pid.id
    result: list[int] = []
    for position in range(pid.t - 1, -1, -1):
        digit, rank = divmod(rank, math.factorial(position))
        result.append(remaining.pop(digit))
    return tuple(result)


def word_id(symbols: Sequence[int], q: int) -> int:
    if not symbols:
        raise RangeError("A word needs at least one symbol.")
    if any(not 0 <= s < q for s in symbols):
        raise InvalidInputError(f"Symbols {tuple(symbols)} not all in 0..{q - 1}.")
    value = 0
    for s in symbols:
        value = value * q + int(s)
    return value


def word_from_id(value: int, q: int, t: int) -> tuple[int, ...]:
    if not 0 <= value < q**t:
        raise InvalidInputError(f"Word id {value} outside 0..{q}^{t}-1.")
    digits = []
    for _ in range(t):
        value, digit = divmod(value, q)
        digits.append(digit)
    return tuple(reversed(digits))


@dataclass(frozen=True, slots=True)
class ColumnTuple:
    """Strictly increasing 1-based column indices."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        indices = tuple(int(i) for i in self.indices)
        if not indices:
            raise InvalidInputError("A column tuple needs at least one index.")
        if indices[0] < 1:
            raise InvalidInputError(f"Column indices are 1-based, got {indices}.")
        if any(a >= b for a, b in zip(indices, indices[1:])):
            raise InvalidInputError(f"Column indices must strictly increase, got {indices}.")
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_zero_based(cls, indices: Iterable[int]) -> ColumnTuple:
        return cls(tuple(int(i) + 1 for i in indices))

    @property
    def t(self) -> int:
        return len(self.indices)

    @property
    def zero_based(self) -> tuple[int, ...]:
        return tuple(i - 1 for i in self.indices)

    def check_within(self, n: int) -> None:
        if self.indices[-1] > n:
            raise InvalidInputError(f"Column {self.indices[-1]} out of range for n={n}.")

    def __str__(self) -> str:
        return "(" + ",".join(str(i) for i in self.indices) + ")"


def _as_matrix(rows: Iterable[Sequence[int]], n: int | None) -> np.ndarray:
    rows = [tuple(int(v) for v in row) for row in rows]
    if not rows:
        if n is None:
            raise ParameterError("An empty array needs an explicit column count n.")
        return np.zeros((0, n), dtype=np.int64)
    width = len(rows[0])
    if any(len(row) != width for row in rows):
        raise InvalidInputError("Array rows must all have the same length.")
    if n is not None and width != n:
        raise InvalidInputError(f"Rows have length {width}, expected n={n}.")
    return np.array(rows, dtype=np.int64)


def _frozen_cells(cells: np.ndarray) -> np.ndarray:
    matrix = np.array(cells, dtype=np.int64, copy=True)
    if matrix.ndim != 2:
        raise InvalidInputError(f"Array cells must be a k x n matrix, got shape {matrix.shape}.")
    if matrix.shape[1] < 1:
        raise ParameterError("An array needs at least one column.")
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class WordArray:
    """k x n matrix over the alphabet {0..q-1}."""

    kind: ClassVar[ArrayKind] = ArrayKind.WORDS

    q: int
    cells: np.ndarray

    def __post_init__(self) -> None:
        if self.q < 2:
            raise ParameterError(f"Alphabet size q must be >= 2, got {self.q}.")
        cells = _frozen_cells(self.cells)
        if cells.size and (cells.min() < 0 or cells.max() >= self.q):
            raise InvalidInputError(f"Every cell must lie in 0..{self.q - 1}.")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_rows(
        cls, rows: Iterable[Sequence[int]], q: int, n: int | None = None
    ) -> WordArray:
        return cls(q=q, cells=_as_matrix(rows, n))

    @property
    def k(self) -> int:
        return self.cells.shape[0]

    @property
    def n(self) -> int:
        return self.cells.shape[1]

    def arity(self, t: int) -> int:
        return self.q**t

    def encode(self, sub: np.ndarray) -> np.ndarray:
        return encode_words(sub, self.q)

    def with_rows(self, rows: Iterable[Sequence[int]]) -> WordArray:
        extra = _as_matrix(rows, self.n)
        return WordArray(q=self.q, cells=np.vstack([self.cells, extra]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WordArray):
            return NotImplemented
        return self.q == other.q and np.array_equal(self.cells, other.cells)


@dataclass(frozen=True, eq=False)
class PermArray:
    """k rows, each a permutation of {1..n}."""

    kind: ClassVar[ArrayKind] = ArrayKind.PERMS

    cells: np.ndarray

    def __post_init__(self) -> None:
        cells = _frozen_cells(self.cells)
        if cells.size:
            expected = np.arange(1, cells.shape[1] + 1)
            bad = np.flatnonzero((np.sort(cells, axis=1) != expected).any(axis=1))
            if bad.size:
                raise InvalidInputError(f"Row {int(bad[0]) + 1} is not a permutation of 1..n.")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], n: int | None = None) -> PermArray:
        return cls(cells=_as_matrix(rows, n))

    @property
    def k(self) -> int:
        return self.cells.shape[0]

    @property
    def n(self) -> int:
        return self.cells.shape[1]

    def arity(self, t: int) -> int:
        _check_pattern_length(t)
        return math.factorial(t)

    def encode(self, sub: np.ndarray) -> np.ndarray:
        return encode_patterns(sub)

    def with_rows(self, rows: Iterable[Sequence[int]]) -> PermArray:
        extra = _as_matrix(rows, self.n)
        return PermArray(cells=np.vstack([self.cells, extra]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PermArray):
            return NotImplemented
        return np.array_equal(self.cells, other.cells)


ShatterArray = Union[WordArray, PermArray]
