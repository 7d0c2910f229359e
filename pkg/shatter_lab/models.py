"""Pydantic records shared by the engine, the experiments and the CLI."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import DEFAULT_SEED, REL_TOLERANCE, REPORT_SCHEMA_VERSION
from .core import ArrayKind


class CoverageReport(BaseModel):
    """Outcome of checking every column t-tuple of one array."""

    model_config = ConfigDict(populate_by_name=True, frozen=True)

    schema_version: int = Field(default=REPORT_SCHEMA_VERSION, alias="schema")
    kind: ArrayKind
    t: int = Field(ge=1)
    n: int = Field(ge=1)
    k: int = Field(ge=0)
    x_count: int = Field(ge=0, description="Number of unshattered column t-tuples (X).")
    y_greedy: int = Field(
        ge=0,
        description="First-fit count of pairwise-disjoint unshattered tuples, a lower bound on Y.",
    )
    witnesses: list[tuple[int, ...]] = Field(
        default_factory=list,
        description="Unshattered tuples, 1-based, lexicographically sorted and capped.",
    )
    witnesses_truncated: bool = False

    @model_validator(mode="after")
    def check_counts(self) -> CoverageReport:
        if self.y_greedy > self.x_count:
            raise ValueError("y_greedy cannot exceed x_count")
        if len(self.witnesses) > self.x_count:
            raise ValueError("more witnesses than unshattered tuples")
        return self

    @property
    def covering(self) -> bool:
        return self.x_count == 0


class ThresholdSpec(BaseModel):
    """Evaluated row thresholds for one (kind, n, q, t) configuration."""

    kind: ArrayKind
    n: int = Field(ge=2)
    q: int | None = None
    t: int = Field(ge=1)
    k_upper: float = Field(description="Rows sufficing for coverage with high probability.")
    k_lower: float | None = Field(
        default=None, description="Rows below which coverage fails with high probability."
    )
    a_const: float | None = None
    omega: float | None = None

    @model_validator(mode="after")
    def check_order(self) -> ThresholdSpec:
        if self.k_upper <= 0:
            raise ValueError("k_upper must be positive")
        # omega < 0 places the lower value above the upper one
        if self.k_lower is None or self.n < 4 or (self.omega is not None and self.omega < 0):
            return self
        if self.k_lower > self.k_upper and not math.isclose(
            self.k_lower, self.k_upper, rel_tol=REL_TOLERANCE
        ):
            raise ValueError("k_lower must not exceed k_upper for n >= 4")
        return self


class ScanRecord(BaseModel):
    """One Monte Carlo measurement of P(array is t-covering)."""

    model_config = ConfigDict(frozen=True)

    kind: ArrayKind
    n: int = Field(ge=1)
    q: int | None = Field(default=None, description="Alphabet size; None for permutations.")
    t: int = Field(ge=1)
    k: int = Field(ge=0)
    trials: int = Field(ge=1)
    successes: int = Field(ge=0)
    p_hat: float
    ci_low: float
    ci_high: float
    seed: int = Field(ge=0)

    @field_validator("q", mode="before")
    @classmethod
    def blank_q(cls, value: object) -> object:
        if value == "":
            return None
        return value

    @model_validator(mode="after")
    def check_interval(self) -> ScanRecord:
        if self.successes > self.trials:
            raise ValueError("successes cannot exceed trials")
        if not math.isclose(self.p_hat, self.successes / self.trials, rel_tol=REL_TOLERANCE):
            raise ValueError("p_hat must equal successes / trials")
        if not self.ci_low <= self.p_hat <= self.ci_high:
            raise ValueError("p_hat must lie inside [ci_low, ci_high]")
        return self


class ScanConfig(BaseModel):
    """Parameters of a threshold scan over a range of row counts."""

    kind: ArrayKind
    n: int = Field(ge=1)
    q: int | None = Field(default=None, ge=2)
    t: int = Field(ge=1)
    k_min: int = Field(ge=0)
    k_max: int = Field(ge=0)
    k_step: int = Field(default=1, ge=1)
    trials: int = Field(ge=1)
    seed: int = Field(default=DEFAULT_SEED, ge=0)
    workers: int = Field(default=1, ge=1, description="Parallelism hint; never changes results.")
    output: Path | None = None
    format: Literal["csv", "json"] = "csv"

    @model_validator(mode="after")
    def check_range(self) -> ScanConfig:
        if self.k_min > self.k_max:
            raise ValueError("k_min must not exceed k_max")
        if self.t > self.n:
            raise ValueError("t must not exceed n")
        if self.kind is ArrayKind.WORDS and self.q is None:
            raise ValueError("word scans need an alphabet size q")
        return self

    @property
    def k_values(self) -> list[int]:
        return list(range(self.k_min, self.k_max + 1, self.k_step))


class SecondMomentRecord(BaseModel):
    """Sample moments of the unshattered-tuple count X."""

    kind: ArrayKind
    n: int
    q: int | None = None
    t: int
    k: int
    trials: int
    mean_x: float
    var_x: float
    ratio: float | None = Field(
        default=None, description="var/mean^2, the Chebyshev bound on P(X = 0); None if mean is 0."
    )
    zero_fraction: float = Field(description="Fraction of trials with X = 0.")
    exact_mean: float | None = None
    mean_lower: float | None = None
    mean_upper: float | None = None


class AnalysisConstant(BaseModel):
    """A rows-per-lg(n) constant recomputed next to its reference two-decimal value."""

    name: str
    value: float
    reported: float

    @property
    def rounded(self) -> float:
        return round(self.value, 2)

    @property
    def matches(self) -> bool:
        return self.rounded == self.reported


class PermAnalysisConstants(BaseModel):
    c_tail: AnalysisConstant
    c_two_overlap: AnalysisConstant
    c_one_overlap: AnalysisConstant

    def as_list(self) -> list[AnalysisConstant]:
        return [self.c_tail, self.c_two_overlap, self.c_one_overlap]
