"""Closed-form thresholds, expectation bounds and correlation constants.

Row counts are expressed in rows per array; every "constant" is the
coefficient of lg n. Products with large exponents are evaluated in log space
so k can run to 10^6 without overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
from pydantic import ValidationError
from scipy.special import gammaln

from .config import DEFAULT_A_CONST
from .core import ArrayKind, ParameterError
from .models import AnalysisConstant, PermAnalysisConstants, ThresholdSpec


class DomainError(ValueError):
    """Raised when a formula is evaluated outside the range where it is defined."""


def _lg(x: float) -> float:
    return math.log2(x)


def _log_comb(n: int, r: int) -> float:
    if r < 0 or r > n:
        return -math.inf
    return float(gammaln(n + 1) - gammaln(r + 1) - gammaln(n - r + 1))


def _check_words(n: int, q: int, t: int) -> None:
    if q < 2:
        raise ParameterError(f"q must be >= 2, got {q}.")
    if not 1 <= t <= n:
        raise ParameterError(f"t must lie in 1..n={n}, got {t}.")


def word_rate(q: int, t: int) -> float:
    """lg(q^t / (q^t - 1)): information gained per row about one missing t-word."""
    return -math.log1p(-float(q) ** -t) / math.log(2)


def perm_rate(t: int) -> float:
    """lg(t! / (t! - 1))."""
    if t < 2:
        raise ParameterError(f"Permutation thresholds need t >= 2, got {t}.")
    return -math.log1p(-1.0 / math.factorial(t)) / math.log(2)


def threshold_upper_words(n: int, q: int, t: int) -> float:
    _check_words(n, q, t)
    return t * _lg(n) / word_rate(q, t)


def threshold_upper_words_refined(n: int, q: int, t: int, omega: float = 0.0) -> float:
    """Row count at which the first-moment union bound drops to 2^-omega."""
    _check_words(n, q, t)
    lg_t_factorial = math.lgamma(t + 1) / math.log(2)
    return (t * _lg(n) + omega - lg_t_factorial + t * _lg(q)) / word_rate(q, t)


def threshold_lower_words(n: int, q: int, t: int, a_const: float = DEFAULT_A_CONST) -> float:
    _check_words(n, q, t)
    if n < 4:
        raise DomainError(f"lg lg n must be positive; need n >= 4, got {n}.")
    if a_const < 0:
        raise ParameterError(f"A must be non-negative, got {a_const}.")
    return (t * _lg(n) - a_const * _lg(_lg(n))) / word_rate(q, t)


def threshold_upper_perms(n: int, t: int) -> float:
    if not 2 <= t <= n:
        raise ParameterError(f"t must lie in 2..n={n}, got {t}.")
    return t * _lg(n) / perm_rate(t)


def default_omega(n: int) -> float:
    return _lg(_lg(n))


def threshold_lower_perms(n: int, omega: float | None = None) -> float:
    """Rows below which a random family misses some 3-pattern w.h.p."""
    if n < 3:
        raise DomainError(f"Triples need n >= 3, got {n}.")
    omega = default_omega(n) if omega is None else omega
    return (3 * _lg(n) - omega) / perm_rate(3)


def expected_unshattered_words_upper(n: int, k: int, q: int, t: int) -> float:
    _check_words(n, q, t)
    qt = q**t
    return math.exp(_log_comb(n, t) + t * math.log(q) + k * math.log1p(-1.0 / qt))


def expected_unshattered_words_lower(n: int, k: int, q: int, t: int) -> float:
    """Single-missing-word lower bound on E(X)."""
    _check_words(n, q, t)
    return math.exp(_log_comb(n, t) + k * math.log1p(-1.0 / q**t))


def exact_prob_tuple_covered(k: int, arity: int) -> float:
    """P(k uniform draws from ``arity`` symbols hit every symbol), by inclusion-exclusion."""
    if arity < 1 or k < 0:
        raise ParameterError(f"Need arity >= 1 and k >= 0, got arity={arity}, k={k}.")
    if k < arity:
        return 0.0
    if arity == 1:
        return 1.0
    # Alternating terms reach C(arity, arity/2) in size; carry that many extra digits.
    digits = 30 + int(_log_comb(arity, arity // 2) / math.log(10))
    with mp.workdps(digits):
        total = mp.fsum(
            (-1) ** m * mp.binomial(arity, m) * mp.power(mp.mpf(arity - m) / arity, k)
            for m in range(arity + 1)
        )
        return min(1.0, max(0.0, float(total)))


def exact_expected_unshattered(n: int, k: int, t: int, arity: int) -> float:
    return math.comb(n, t) * (1.0 - exact_prob_tuple_covered(k, arity))


def expected_unshattered_perms_bounds(n: int, k: int) -> tuple[float, float]:
    """(lower, upper) bounds on E(X) for 3-patterns; lower is clamped at 0."""
    if n < 3:
        raise ParameterError(f"Triples need n >= 3, got {n}.")
    triples = math.comb(n, 3)
    lower = triples * max(0.0, 6 * (5 / 6) ** k - 15 * (4 / 6) ** k)
    upper = triples * 6 * (5 / 6) ** k
    return lower, upper


def _check_overlap(t: int, q: int, r: int) -> None:
    if q < 2 or t < 2:
        raise ParameterError(f"Need q >= 2 and t >= 2, got q={q}, t={t}.")
    if not 1 <= r <= t - 1:
        raise ParameterError(f"Overlap r must lie in 1..{t - 1}, got {r}.")


def overlap_base(t: int, q: int, r: int) -> float:
    """(q^t + q^(r-t) - 2) / q^t: per-row factor of the joint miss probability."""
    qt = float(q) ** t
    return (qt + float(q) ** (r - t) - 2) / qt


def lemma25_bound(t: int, q: int, r: int, k: int, *, with_correction: bool = False) -> float:
    """Asymptotic bound on P(two t-tuples overlapping in r columns are both unshattered)."""
    _check_overlap(t, q, r)
    base = overlap_base(t, q, r)
    log_value = (2 * t - r) * math.log(q) + k * math.log(base)
    value = math.exp(log_value)
    if with_correction:
        qt = q**t
        ratio = (qt - 2) / (qt + float(q) ** (r - t) - 2)
        value *= 1 + (qt - 1) / (2 * float(q) ** (t - r)) * ratio**k
    return value


def correlation_constant(t: int, q: int, r: int) -> float:
    _check_overlap(t, q, r)
    return (2 * t - r) / -_lg(overlap_base(t, q, r))


def correlation_argmax(t: int, q: int) -> int:
    return max(range(1, t), key=lambda r: (correlation_constant(t, q, r), -r))


def expected_overlapping_pairs_upper(n: int, k: int, q: int, t: int) -> float:
    """Bound on the expected number of ordered overlapping pairs of unshattered t-tuples."""
    _check_words(n, q, t)
    if t < 2:
        return 0.0
    total = 0.0
    for r in range(1, t):
        if t - r > n - t:
            continue
        log_pairs = _log_comb(n, t) + _log_comb(t, r) + _log_comb(n - t, t - r)
        total += math.exp(log_pairs) * lemma25_bound(t, q, r, k)
    return total


def lemma27_check(q: int, t: int) -> bool:
    """(q^(r-1) - 1)/(r - 1) strictly increases over integer r in 2..t-1."""
    values = [(q ** (r - 1) - 1) / (r - 1) for r in range(2, t)]
    return all(a < b for a, b in zip(values, values[1:]))


def lemma29_check(t: int, q: int) -> bool:
    """The overlap constant at r=1 lies strictly below the single-tuple threshold constant."""
    return correlation_constant(t, q, 1) < t / word_rate(q, t)


@dataclass(frozen=True, slots=True)
class InequalityCheck:
    holds: bool
    excluded: bool
    lhs: float
    rhs: float
    note: str = ""

    def __bool__(self) -> bool:
        return self.holds


def ineq7_check(t: int, q: int) -> InequalityCheck:
    """(2t-1)/(t-2)·(q^(t-2) - 1) <= 2(q^(t-1) - 2), sufficient for r=1 maximality."""
    if t < 3 or q < 2:
        raise ParameterError(f"Need t >= 3 and q >= 2, got t={t}, q={q}.")
    lhs = (2 * t - 1) / (t - 2) * (q ** (t - 2) - 1)
    rhs = 2.0 * (q ** (t - 1) - 2)
    if t == 3 and q == 2:
        return InequalityCheck(
            holds=lhs <= rhs,
            excluded=True,
            lhs=lhs,
            rhs=rhs,
            note="t=3, q=2 is not covered; r=1 maximality is checked directly "
            f"(argmax r = {correlation_argmax(3, 2)})",
        )
    return InequalityCheck(holds=lhs <= rhs, excluded=False, lhs=lhs, rhs=rhs)


def conditional_missing_base(joint_count: int, overlap: int) -> Fraction:
    """Per-row base (6/5)(5/6 - P(D and not F)) for a pair of 3-patterns.

    ``joint_count`` counts the orderings of the spanned columns realising both
    patterns: out of 120 for one shared column (P(D) = 20/120), out of 24 for two
    shared columns (P(D) = 4/24).
    """
    if overlap == 1:
        if not 0 <= joint_count <= 6:
            raise ParameterError(f"One-overlap joint count must lie in 0..6, got {joint_count}.")
        missing_joint = Fraction(20 - joint_count, 120)
    elif overlap == 2:
        if not 0 <= joint_count <= 2:
            raise ParameterError(f"Two-overlap joint count must lie in 0..2, got {joint_count}.")
        missing_joint = Fraction(4 - joint_count, 24)
    else:
        raise ParameterError(f"Overlap must be 1 or 2, got {overlap}.")
    return Fraction(6, 5) * (Fraction(5, 6) - missing_joint)


def conditional_missing_prob(joint_count: int, k: int, overlap: int) -> float:
    if k < 0:
        raise ParameterError(f"k must be >= 0, got {k}.")
    return float(conditional_missing_base(joint_count, overlap)) ** k


def prefactored_base(joint_count: int, overlap: int) -> Fraction:
    """Base including the (5/6)^k chance that the first triple misses its pattern."""
    return Fraction(5, 6) * conditional_missing_base(joint_count, overlap)


def perm_analysis_constants() -> PermAnalysisConstants:
    one_overlap = prefactored_base(6, 1)
    return PermAnalysisConstants(
        c_tail=AnalysisConstant(name="c_tail", value=5 / _lg(3 / 2), reported=8.55),
        c_two_overlap=AnalysisConstant(
            name="c_two_overlap", value=4 / _lg(4 / 3), reported=9.64
        ),
        c_one_overlap=AnalysisConstant(
            name="c_one_overlap", value=5 / -_lg(float(one_overlap)), reported=10.41
        ),
    )


@dataclass(frozen=True, slots=True)
class VCWindow:
    """Row interval in which the VC dimension of a random word array is t+1 w.h.p."""

    t: int
    k_from: float
    k_to: float
    c_from: float
    c_to: float

    @property
    def vc(self) -> int:
        return self.t + 1


def vc_window(n: int, q: int, t: int, a_const: float = DEFAULT_A_CONST) -> VCWindow:
    return VCWindow(
        t=t,
        k_from=threshold_upper_words(n, q, t),
        k_to=threshold_lower_words(n, q, t + 1, a_const),
        c_from=t / word_rate(q, t),
        c_to=(t + 1) / word_rate(q, t + 1),
    )


def chebyshev_zero_bound(mean: float, var: float) -> float | None:
    """var / mean^2, the second-moment bound on P(X = 0); None when the mean is zero."""
    if mean <= 0:
        return None
    return var / mean**2


def threshold_spec(
    kind: ArrayKind | str,
    n: int,
    t: int,
    q: int | None = None,
    *,
    a_const: float = DEFAULT_A_CONST,
    omega: float | None = None,
) -> ThresholdSpec:
    kind = ArrayKind(kind)
    if kind is ArrayKind.WORDS:
        if q is None:
            raise ParameterError("Word thresholds need an alphabet size q.")
        k_upper = threshold_upper_words(n, q, t)
        k_lower = threshold_lower_words(n, q, t, a_const) if n >= 4 else None
    else:
        k_upper = threshold_upper_perms(n, t)
        if t == 3:
            omega = default_omega(n) if omega is None else omega
            k_lower = threshold_lower_perms(n, omega)
        else:
            k_lower = None
    try:
        return ThresholdSpec(
            kind=kind,
            n=n,
            q=q if kind is ArrayKind.WORDS else None,
            t=t,
            k_upper=k_upper,
            k_lower=k_lower,
            a_const=a_const if kind is ArrayKind.WORDS else None,
            omega=omega,
        )
    except ValidationError as exc:
        raise ParameterError(str(exc)) from exc
