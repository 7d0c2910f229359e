"""Monte Carlo measurement of covering probabilities and of the count X.

Trials are split into fixed-size blocks and block ``b`` at row count ``k``
draws from ``SeedSpec(seed).child(k, b)``. Blocks are aggregated in order, so
records are bit-identical whatever the number of worker processes.
"""

from __future__ import annotations

import csv
import json
import math
from functools import partial
from pathlib import Path
from typing import Iterable, Literal

import numpy as np
from loguru import logger
from pydantic import ValidationError
from statsmodels.stats.proportion import proportion_confint

from .config import FLOAT_DIGITS, SCAN_CSV_FIELDS, WILSON_ALPHA
from .core import ArrayKind, ParameterError
from .models import ScanConfig, ScanRecord, SecondMomentRecord
from .randgen import SeedSpec, block_plan, map_blocks, trial_cells
from .shatter import chunk_size, encoder_for, tuple_chunks, unshattered_mask
from .theory import (
    chebyshev_zero_bound,
    exact_expected_unshattered,
    expected_unshattered_perms_bounds,
    expected_unshattered_words_lower,
    expected_unshattered_words_upper,
)

RecordFormat = Literal["csv", "json"]


class ThresholdNotFoundError(LookupError):
    """Raised when no pair of scan records brackets p_hat = 0.5."""


class RecordParseError(ValueError):
    """Raised when a persisted scan file cannot be read back."""


def _normalise(
    kind: ArrayKind | str, n: int, q: int | None, t: int, k: int
) -> tuple[ArrayKind, int | None, int]:
    kind = ArrayKind(kind)
    if n < 1 or not 1 <= t <= n:
        raise ParameterError(f"Need n >= 1 and 1 <= t <= n, got n={n}, t={t}.")
    if k < 0:
        raise ParameterError(f"k must be >= 0, got {k}.")
    if kind is ArrayKind.WORDS:
        if q is None or q < 2:
            raise ParameterError(f"Word arrays need q >= 2, got {q}.")
        return kind, q, q**t
    return kind, None, math.factorial(t)


def _covering_block(
    task: tuple[int, int],
    *,
    kind: ArrayKind,
    q: int | None,
    n: int,
    t: int,
    k: int,
    arity: int,
    seed: SeedSpec,
) -> int:
    block, size = task
    if k < arity:
        return 0
    rng = seed.child(k, block).generator()
    encode = encoder_for(kind, q)
    covered = 0
    for cells in trial_cells(rng, kind, q, n, k, size):
        alive = np.arange(len(cells))
        for chunk in tuple_chunks(n, t, chunk_size(len(cells), k, t)):
            missing = unshattered_mask(cells[alive], chunk, encode, arity).any(axis=1)
            alive = alive[~missing]
            if not alive.size:
                break
        covered += int(alive.size)
    return covered


def _x_block(
    task: tuple[int, int],
    *,
    kind: ArrayKind,
    q: int | None,
    n: int,
    t: int,
    k: int,
    arity: int,
    seed: SeedSpec,
) -> list[int]:
    block, size = task
    if k < arity:
        return [math.comb(n, t)] * size
    rng = seed.child(k, block).generator()
    encode = encoder_for(kind, q)
    counts: list[int] = []
    for cells in trial_cells(rng, kind, q, n, k, size):
        batch = np.zeros(len(cells), dtype=np.int64)
        for chunk in tuple_chunks(n, t, chunk_size(len(cells), k, t)):
            batch += unshattered_mask(cells, chunk, encode, arity).sum(axis=1)
        counts.extend(batch.tolist())
    return counts


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    low, high = proportion_confint(successes, trials, alpha=WILSON_ALPHA, method="wilson")
    p_hat = successes / trials
    return max(0.0, min(float(low), p_hat)), min(1.0, max(float(high), p_hat))


def mc_covering_probability(
    kind: ArrayKind | str,
    n: int,
    q: int | None,
    t: int,
    k: int,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> ScanRecord:
    """Fraction of ``trials`` random k-row arrays that shatter every column t-tuple."""
    kind, q, arity = _normalise(kind, n, q, t, k)
    work = partial(
        _covering_block, kind=kind, q=q, n=n, t=t, k=k, arity=arity, seed=SeedSpec(seed)
    )
    successes = sum(map_blocks(work, block_plan(trials), workers))
    ci_low, ci_high = wilson_interval(successes, trials)
    logger.debug(f"{kind.value} n={n} t={t} k={k}: {successes}/{trials} covering")
    return ScanRecord(
        kind=kind,
        n=n,
        q=q,
        t=t,
        k=k,
        trials=trials,
        successes=successes,
        p_hat=successes / trials,
        ci_low=ci_low,
        ci_high=ci_high,
        seed=seed,
    )


def nonmonotone_points(records: list[ScanRecord]) -> list[tuple[int, int]]:
    """Pairs (k_earlier, k_later) whose intervals show p_hat decreasing in k."""
    flagged = []
    for i, earlier in enumerate(records):
        for later in records[i + 1 :]:
            if later.ci_high < earlier.ci_low:
                flagged.append((earlier.k, later.k))
    return flagged


def threshold_scan(cfg: ScanConfig) -> list[ScanRecord]:
    logger.info(
        f"Scanning {cfg.kind.value} n={cfg.n} t={cfg.t} k={cfg.k_min}..{cfg.k_max} "
        f"step {cfg.k_step}, {cfg.trials} trials, seed {cfg.seed}"
    )
    records = [
        mc_covering_probability(
            cfg.kind, cfg.n, cfg.q, cfg.t, k, cfg.trials, cfg.seed, workers=cfg.workers
        )
        for k in cfg.k_values
    ]
    for k_from, k_to in nonmonotone_points(records):
        logger.warning(f"p_hat drops beyond interval overlap between k={k_from} and k={k_to}")
    if cfg.output is not None:
        write_records(cfg.output, records, cfg.format)
    return records


def empirical_threshold(records: list[ScanRecord]) -> float:
    """k at which p_hat crosses 0.5, interpolating linearly between bracketing records."""
    for lower, upper in zip(records, [*records[1:], None]):
        if lower.p_hat == 0.5:
            return float(lower.k)
        if upper is not None and (lower.p_hat - 0.5) * (upper.p_hat - 0.5) < 0:
            fraction = (0.5 - lower.p_hat) / (upper.p_hat - lower.p_hat)
            return lower.k + fraction * (upper.k - lower.k)
    raise ThresholdNotFoundError(f"No p_hat = 0.5 crossing among {len(records)} records.")


def mc_second_moment(
    kind: ArrayKind | str,
    n: int,
    q: int | None,
    t: int,
    k: int,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
) -> SecondMomentRecord:
    kind, q, arity = _normalise(kind, n, q, t, k)
    work = partial(_x_block, kind=kind, q=q, n=n, t=t, k=k, arity=arity, seed=SeedSpec(seed))
    samples = np.array(
        [x for block in map_blocks(work, block_plan(trials), workers) for x in block], dtype=float
    )
    mean_x = float(samples.mean())
    var_x = float(samples.var(ddof=1)) if trials > 1 else 0.0

    mean_lower = mean_upper = None
    if kind is ArrayKind.WORDS:
        mean_lower = expected_unshattered_words_lower(n, k, q, t)  # type: ignore[arg-type]
        mean_upper = expected_unshattered_words_upper(n, k, q, t)  # type: ignore[arg-type]
    elif t == 3:
        mean_lower, mean_upper = expected_unshattered_perms_bounds(n, k)

    return SecondMomentRecord(
        kind=kind,
        n=n,
        q=q,
        t=t,
        k=k,
        trials=trials,
        mean_x=mean_x,
        var_x=var_x,
        ratio=chebyshev_zero_bound(mean_x, var_x),
        zero_fraction=float(np.count_nonzero(samples == 0)) / trials,
        exact_mean=exact_expected_unshattered(n, k, t, arity),
        mean_lower=mean_lower,
        mean_upper=mean_upper,
    )


def _csv_row(record: ScanRecord) -> dict[str, str]:
    row = {}
    for name, value in record.model_dump().items():
        if value is None:
            row[name] = ""
        elif isinstance(value, float):
            row[name] = f"{value:.{FLOAT_DIGITS}g}"
        elif isinstance(value, ArrayKind):
            row[name] = value.value
        else:
            row[name] = str(value)
    return row


def write_records(
    path: Path | str, records: Iterable[ScanRecord], format: RecordFormat = "csv"
) -> None:
    path = Path(path)
    records = list(records)
    if format == "json":
        payload = [record.model_dump(mode="json") for record in records]
        path.write_text(json.dumps(payload, indent=2) + "\n")
    else:
        with path.open("w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(SCAN_CSV_FIELDS), lineterminator="\n")
            writer.writeheader()
            writer.writerows(_csv_row(record) for record in records)
    logger.info(f"Wrote {len(records)} scan record(s) to {path}")


def _read_csv(path: Path) -> list[ScanRecord]:
    records = []
    with path.open(newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != SCAN_CSV_FIELDS:
            raise RecordParseError(f"{path}: line 1: header must be {','.join(SCAN_CSV_FIELDS)}.")
        for row in reader:
            if None in row or None in row.values():
                raise RecordParseError(f"{path}: line {reader.line_num}: wrong number of fields.")
            try:
                records.append(ScanRecord.model_validate(row))
            except ValidationError as exc:
                raise RecordParseError(f"{path}: line {reader.line_num}: {exc}") from exc
    return records


def _read_json(path: Path) -> list[ScanRecord]:
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise RecordParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(payload, list):
        raise RecordParseError(f"{path}: expected a JSON array of records.")
    records = []
    for index, item in enumerate(payload):
        try:
            records.append(ScanRecord.model_validate(item))
        except ValidationError as exc:
            raise RecordParseError(f"{path}: record {index}: {exc}") from exc
    return records


def read_records(path: Path | str, format: RecordFormat = "csv") -> list[ScanRecord]:
    path = Path(path)
    if format == "json":
        return _read_json(path)
    return _read_csv(path)
