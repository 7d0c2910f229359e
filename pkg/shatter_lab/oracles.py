"""Brute-force verifiers kept independent of the bitset engine.

- exhaustive enumerations of the orderings of 5 and 4 columns that give the
  joint-occurrence counts of two overlapping 3-patterns;
- a plain-collections shattering check;
- Monte Carlo estimates of the probability that two overlapping tuples are
  both unshattered.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import partial
from typing import Literal

import numpy as np
from loguru import logger

from .config import CONFIDENCE_SIGMAS, DEFAULT_MC_SLACK
from .core import ArrayKind, ColumnTuple, ParameterError, ShatterArray
from .randgen import SeedSpec, block_plan, map_blocks, trial_cells
from .shatter import encoder_for, unshattered_mask
from .theory import conditional_missing_base

Pattern = tuple[int, ...]
OverlapCase = Literal["identical", "consistent", "inconsistent"]

S3: tuple[Pattern, ...] = tuple(itertools.permutations((1, 2, 3)))

# Rank pairs of the one-overlap reference table and its numerators, printed there over 100.
TABLE1_ROWS: tuple[tuple[int, int], ...] = ((1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3))
TABLE1_REPORTED = {(1, 1): 14, (1, 2): 17, (1, 3): 19, (2, 2): 16, (2, 3): 17, (3, 3): 14}
TABLE1_DENOMINATOR_NOTE = (
    "complements are numerators over 120 (P(D) = 20/120); the reference table prints them "
    "over 100, which is inconsistent with the 14/120 bound built on it"
)


class OracleConsistencyError(RuntimeError):
    """Raised when pattern pairs of the same class disagree in an enumeration."""


@dataclass(frozen=True, slots=True)
class OverlapGeometry:
    """Two 3-column sets sharing ``r`` columns, placed among the 6 - r spanned columns."""

    r: int
    gamma_positions: tuple[int, int, int]
    delta_positions: tuple[int, int, int]

    def __post_init__(self) -> None:
        if self.r not in (1, 2):
            raise ParameterError(f"Overlap must be 1 or 2, got {self.r}.")
        for positions in (self.gamma_positions, self.delta_positions):
            if len(positions) != 3 or any(a >= b for a, b in zip(positions, positions[1:])):
                raise ParameterError(f"Positions must be 3 strictly increasing, got {positions}.")
            if positions[0] < 0 or positions[-1] >= self.width:
                raise ParameterError(f"Positions {positions} outside 0..{self.width - 1}.")
        if len(set(self.gamma_positions) & set(self.delta_positions)) != self.r:
            raise ParameterError(f"Column sets must share exactly {self.r} column(s).")

    @classmethod
    def default(cls, r: int) -> OverlapGeometry:
        if r == 1:
            return cls(1, (0, 1, 2), (2, 3, 4))
        return cls(r, (0, 1, 2), (1, 2, 3))

    @property
    def width(self) -> int:
        return 6 - self.r

    @property
    def shared(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.gamma_positions) & set(self.delta_positions)))

    def shared_values(
        self, gamma_pattern: Pattern, delta_pattern: Pattern
    ) -> tuple[Pattern, Pattern]:
        """Ranks the two patterns assign to the shared columns, in column order."""
        g = tuple(gamma_pattern[self.gamma_positions.index(c)] for c in self.shared)
        d = tuple(delta_pattern[self.delta_positions.index(c)] for c in self.shared)
        return g, d


def all_geometries(r: int) -> list[OverlapGeometry]:
    width = 6 - r
    geometries = []
    for gamma in itertools.combinations(range(width), 3):
        rest = [c for c in range(width) if c not in gamma]
        for shared in itertools.combinations(gamma, r):
            delta = tuple(sorted(rest + list(shared)))
            geometries.append(OverlapGeometry(r, gamma, delta))  # type: ignore[arg-type]
    return geometries


def pattern_pair_joint_counts(geometry: OverlapGeometry) -> dict[tuple[Pattern, Pattern], int]:
    """Number of orderings of the spanned columns realising each pair of 3-patterns."""
    counts: Counter[tuple[Pattern, Pattern]] = Counter()
    for ordering in itertools.permutations(range(1, geometry.width + 1)):
        gamma = _pattern_of([ordering[i] for i in geometry.gamma_positions])
        delta = _pattern_of([ordering[i] for i in geometry.delta_positions])
        counts[(gamma, delta)] += 1
    return {(a, b): counts.get((a, b), 0) for a in S3 for b in S3}


def _pattern_of(values: list[int]) -> Pattern:
    ranks = sorted(values)
    return tuple(ranks.index(v) + 1 for v in values)


@dataclass(frozen=True, slots=True)
class Table1Entry:
    g: int
    d: int
    count: int

    @property
    def complement(self) -> int:
        return 20 - self.count

    @property
    def probability(self) -> Fraction:
        return Fraction(self.complement, 120)

    @property
    def closed_form(self) -> int:
        left = math.comb(self.g + self.d - 2, self.g - 1)
        return left * math.comb(6 - self.g - self.d, 3 - self.g)


def table1_joint_counts(
    geometry: OverlapGeometry | None = None,
) -> dict[tuple[int, int], Table1Entry]:
    """Joint counts (out of 120) keyed by the ranks (g, d) of the shared value in each pattern."""
    geometry = geometry or OverlapGeometry.default(1)
    if geometry.r != 1:
        raise ParameterError("Rank-pair counts need a one-column overlap.")
    groups: dict[tuple[int, int], set[int]] = defaultdict(set)
    for (gamma, delta), count in pattern_pair_joint_counts(geometry).items():
        (g,), (d,) = geometry.shared_values(gamma, delta)
        groups[(g, d)].add(count)
    table = {}
    for pair, values in sorted(groups.items()):
        if len(values) != 1:
            raise OracleConsistencyError(f"Rank pair {pair} has differing counts {sorted(values)}.")
        entry = Table1Entry(g=pair[0], d=pair[1], count=values.pop())
        if entry.count != entry.closed_form:
            raise OracleConsistencyError(
                f"Rank pair {pair}: enumerated {entry.count}, closed form {entry.closed_form}."
            )
        table[pair] = entry
    return table


def overlap2_case(geometry: OverlapGeometry, gamma: Pattern, delta: Pattern) -> OverlapCase:
    g, d = geometry.shared_values(gamma, delta)
    if g == d:
        return "identical"
    if (g[0] < g[1]) == (d[0] < d[1]):
        return "consistent"
    return "inconsistent"


def overlap2_joint_probs(geometry: OverlapGeometry | None = None) -> dict[OverlapCase, Fraction]:
    """P(D and F) for two 3-patterns on column sets sharing two columns, per case."""
    geometry = geometry or OverlapGeometry.default(2)
    if geometry.r != 2:
        raise ParameterError("Case classification needs a two-column overlap.")
    groups: dict[OverlapCase, set[int]] = defaultdict(set)
    for (gamma, delta), count in pattern_pair_joint_counts(geometry).items():
        groups[overlap2_case(geometry, gamma, delta)].add(count)
    result: dict[OverlapCase, Fraction] = {}
    for case in ("identical", "consistent", "inconsistent"):
        values = groups[case]
        if len(values) != 1:
            raise OracleConsistencyError(f"Case '{case}' has differing counts {sorted(values)}.")
        result[case] = Fraction(values.pop(), 24)
    return result


def conditional_missing_bases(
    geometry: OverlapGeometry | None = None,
) -> dict[tuple[Pattern, Pattern], Fraction]:
    """Per-row bases (6/5)(5/6 - P(D and not F)) for all 36 one-overlap pattern pairs."""
    geometry = geometry or OverlapGeometry.default(1)
    counts = pattern_pair_joint_counts(geometry)
    return {pair: conditional_missing_base(count, geometry.r) for pair, count in counts.items()}


def naive_shatter_check(
    arr: ShatterArray, cols: ColumnTuple, kind: ArrayKind | str | None = None
) -> bool:
    """Collect projected rows in a set and compare its size with q^t or t!."""
    kind = ArrayKind(kind) if kind is not None else arr.kind
    cols.check_within(arr.n)
    positions = cols.zero_based
    seen: set[tuple[int, ...]] = set()
    for row in arr.cells.tolist():
        projected = [row[i] for i in positions]
        if kind is ArrayKind.WORDS:
            seen.add(tuple(projected))
        else:
            seen.add(tuple(sorted(range(cols.t), key=projected.__getitem__)))
    if kind is ArrayKind.WORDS:
        target = arr.q**cols.t  # type: ignore[union-attr]
    else:
        target = math.factorial(cols.t)
    return len(seen) == target


def _pair_hits(
    task: tuple[int, int],
    *,
    kind: ArrayKind,
    q: int | None,
    width: int,
    gamma: tuple[int, ...],
    delta: tuple[int, ...],
    k: int,
    seed: SeedSpec,
) -> int:
    block_index, size = task
    rng = seed.child(k, block_index).generator()
    t = len(gamma)
    arity = q**t if kind is ArrayKind.WORDS else math.factorial(t)  # type: ignore[operator]
    encode = encoder_for(kind, q)
    hits = 0
    for cells in trial_cells(rng, kind, q, width, k, size):
        both = (
            unshattered_mask(cells, np.array([gamma]), encode, arity)[:, 0]
            & unshattered_mask(cells, np.array([delta]), encode, arity)[:, 0]
        )
        hits += int(np.count_nonzero(both))
    return hits


def _estimate(
    kind: ArrayKind,
    q: int | None,
    width: int,
    gamma: tuple[int, ...],
    delta: tuple[int, ...],
    k: int,
    trials: int,
    seed: SeedSpec | int,
    workers: int,
) -> float:
    seed = seed if isinstance(seed, SeedSpec) else SeedSpec(seed)
    work = partial(
        _pair_hits, kind=kind, q=q, width=width, gamma=gamma, delta=delta, k=k, seed=seed
    )
    hits = sum(map_blocks(work, block_plan(trials), workers))
    logger.debug(f"Pair correlation {kind.value} k={k}: {hits}/{trials} trials with both missing")
    return hits / trials


def mc_pair_correlation(
    geometry: OverlapGeometry, k: int, trials: int, seed: SeedSpec | int, *, workers: int = 1
) -> float:
    """Estimate P(both 3-column sets miss some pattern) over random k-row permutation arrays."""
    if k < 1 or trials < 1:
        raise ParameterError(f"Need k >= 1 and trials >= 1, got k={k}, trials={trials}.")
    if k < 6:
        return 1.0
    return _estimate(
        ArrayKind.PERMS,
        None,
        geometry.width,
        geometry.gamma_positions,
        geometry.delta_positions,
        k,
        trials,
        seed,
        workers,
    )


def mc_word_pair_correlation(
    t: int, q: int, r: int, k: int, trials: int, seed: SeedSpec | int, *, workers: int = 1
) -> float:
    """Same estimate for word arrays on 2t - r columns, the overlap being the middle r."""
    if not 1 <= r <= t - 1 or q < 2:
        raise ParameterError(f"Need q >= 2 and 1 <= r <= t-1, got q={q}, r={r}, t={t}.")
    if k < 1 or trials < 1:
        raise ParameterError(f"Need k >= 1 and trials >= 1, got k={k}, trials={trials}.")
    if k < q**t:
        return 1.0
    gamma = tuple(range(t))
    delta = tuple(range(t - r, 2 * t - r))
    return _estimate(ArrayKind.WORDS, q, 2 * t - r, gamma, delta, k, trials, seed, workers)


def mc_upper_allowance(
    bound: float,
    trials: int,
    *,
    slack: float = DEFAULT_MC_SLACK,
    sigmas: float = CONFIDENCE_SIGMAS,
) -> float:
    """Largest estimate consistent with ``bound``: slack times the bound plus a binomial margin."""
    p = min(1.0, bound * slack)
    return p + sigmas * math.sqrt(max(p * (1.0 - p), 1.0 / trials) / trials)


def pair_union_bound(geometry: OverlapGeometry, k: int) -> float:
    """Sum over the 36 pattern pairs of P(a row shows neither pattern)^k."""
    orderings = math.factorial(geometry.width)
    return sum(
        (2 / 3 + count / orderings) ** k for count in pattern_pair_joint_counts(geometry).values()
    )
