import itertools
import math

import numpy as np
import pytest

from shatter_lab.core import (
    ArrayKind,
    ColumnTuple,
    InvalidInputError,
    ParameterError,
    PermArray,
    WordArray,
)
from shatter_lab.oracles import naive_shatter_check
from shatter_lab.randgen import SeedSpec, gen_perm_array, gen_word_array
from shatter_lab.shatter import (
    AtLeast,
    CapacityError,
    count_unshattered,
    exact_max_disjoint_unshattered,
    first_unshattered,
    is_covering,
    patterns_present,
    sample_unshattered,
    vc_dimension,
    words_present,
)

ALL_S3 = [list(p) for p in itertools.permutations((1, 2, 3))]
PAIR_COVER = WordArray.from_rows(
    [(0, 0, 0, 0), (0, 1, 1, 1), (1, 0, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0)], q=2
)


class TestPresence:
    def test_single_word_row(self):
        present = words_present(WordArray.from_rows([(0, 1, 0)], q=2), ColumnTuple((1, 2)))
        assert present.members() == [1]
        assert present.popcount == 1

    def test_full_word_cover(self):
        assert words_present(PAIR_COVER, ColumnTuple((1, 2))).full

    def test_few_rows_never_shatter(self):
        arr = gen_word_array(5, 3, 2, SeedSpec(1))
        for cols in itertools.combinations(range(1, 6), 3):
            assert words_present(arr, ColumnTuple(cols)).popcount <= 3

    def test_all_of_s3(self):
        present = patterns_present(PermArray.from_rows(ALL_S3), ColumnTuple((1, 2, 3)))
        assert present.full
        assert present.popcount == 6

    def test_hand_ranked_patterns(self):
        arr = PermArray.from_rows([(3, 2, 4, 1), (1, 4, 3, 2), (1, 3, 4, 2)])
        present = patterns_present(arr, ColumnTuple((1, 2, 4)))
        # 321 has rank 5, 132 has rank 1
        assert present.members() == [1, 5]

    def test_column_out_of_range(self):
        with pytest.raises(InvalidInputError):
            words_present(PAIR_COVER, ColumnTuple((1, 5)))


class TestCountUnshattered:
    def test_no_rows(self):
        report = count_unshattered(WordArray.from_rows([], q=2, n=5), 2)
        assert report.x_count == math.comb(5, 2)
        assert report.y_greedy == 2
        assert report.witnesses[0] == (1, 2)

    def test_pigeonhole(self):
        report = count_unshattered(gen_word_array(6, 7, 2, SeedSpec(4)), 3)
        assert report.x_count == math.comb(6, 3)
        assert not report.covering

    def test_explicit_cover(self):
        report = count_unshattered(PAIR_COVER, 2)
        assert report.x_count == 0
        assert report.covering
        assert is_covering(PAIR_COVER, 2)

    def test_all_of_s3_covers(self):
        assert is_covering(PermArray.from_rows(ALL_S3), 3)
        assert not is_covering(PermArray.from_rows(ALL_S3[:5]), 3)

    def test_parameter_errors(self):
        with pytest.raises(ParameterError):
            count_unshattered(PAIR_COVER, 5)
        with pytest.raises(ParameterError):
            count_unshattered(PAIR_COVER, 2, kind=ArrayKind.PERMS)

    def test_witness_cap(self):
        report = count_unshattered(WordArray.from_rows([], q=2, n=6), 2, witness_cap=4)
        assert report.x_count == 15
        assert len(report.witnesses) == 4
        assert report.witnesses_truncated

    def test_greedy_is_a_disjoint_packing(self):
        arr = gen_word_array(10, 9, 2, SeedSpec(21))
        report = count_unshattered(arr, 2)
        assert 0 < report.y_greedy <= report.x_count
        assert report.witnesses == sorted(report.witnesses)


def _random_instance(rng: np.random.Generator):
    n = int(rng.integers(2, 7))
    t = int(rng.integers(1, min(n, 3) + 1))
    k = int(rng.integers(0, 14))
    seed = SeedSpec(int(rng.integers(0, 2**32)))
    if rng.random() < 0.5:
        return gen_word_array(n, k, int(rng.integers(2, 4)), seed), t
    return gen_perm_array(n, k, seed), t


def test_engine_agrees_with_naive_check():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        arr, t = _random_instance(rng)
        report = count_unshattered(arr, t)
        naive = [
            cols
            for cols in itertools.combinations(range(1, arr.n + 1), t)
            if not naive_shatter_check(arr, ColumnTuple(cols))
        ]
        assert report.witnesses == naive
        assert is_covering(arr, t) == (not naive)


def test_adding_rows_never_breaks_coverage():
    arr = gen_word_array(5, 40, 2, SeedSpec(9))
    assert is_covering(arr, 2)
    extra = gen_word_array(5, 10, 2, SeedSpec(10))
    assert is_covering(arr.with_rows(extra.cells.tolist()), 2)
    counts = [count_unshattered(WordArray(q=2, cells=arr.cells[:k]), 2).x_count for k in range(41)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


class TestVCDimension:
    def test_no_rows(self):
        assert vc_dimension(WordArray.from_rows([], q=2, n=3)) == 1

    def test_single_row(self):
        assert vc_dimension(WordArray.from_rows([(0, 1, 1, 0)], q=2)) == 1

    def test_full_cover(self):
        assert vc_dimension(PAIR_COVER) == 3
        assert vc_dimension(PAIR_COVER, t_max=2) == AtLeast(3)
        assert str(AtLeast(3)) == "≥ 3"

    def test_sampling_gives_the_same_answer(self):
        arr = gen_word_array(12, 30, 2, SeedSpec(5))
        assert vc_dimension(arr, samples=50, seed=SeedSpec(1)) == vc_dimension(arr)

    def test_sampled_result_is_unshattered(self):
        arr = gen_word_array(8, 6, 2, SeedSpec(2))
        found = sample_unshattered(arr, 3, 20, SeedSpec(0))
        assert found is not None
        assert not naive_shatter_check(arr, found)
        assert sample_unshattered(arr, 3, 0, SeedSpec(0)) is None

    def test_first_unshattered_is_lexicographic(self):
        assert first_unshattered(PAIR_COVER, 2) is None
        assert first_unshattered(WordArray.from_rows([], q=2, n=3), 2) == ColumnTuple((1, 2))


class TestExactDisjoint:
    def test_none_unshattered(self):
        assert exact_max_disjoint_unshattered(PAIR_COVER, 2) == 0

    def test_two_disjoint(self):
        assert exact_max_disjoint_unshattered(WordArray.from_rows([], q=2, n=4), 2) == 2

    def test_common_column(self):
        # column 1 constant, columns 2 and 3 carry all four words
        arr = WordArray.from_rows([(0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1)], q=2)
        assert count_unshattered(arr, 2).x_count == 2
        assert exact_max_disjoint_unshattered(arr, 2) == 1

    def test_capacity(self):
        with pytest.raises(CapacityError):
            exact_max_disjoint_unshattered(WordArray.from_rows([], q=2, n=10), 2)

    def test_exact_dominates_greedy(self):
        for seed in range(20):
            arr = gen_word_array(8, 6, 2, SeedSpec(seed))
            report = count_unshattered(arr, 2)
            if report.x_count > 25:
                continue
            assert exact_max_disjoint_unshattered(arr, 2) >= report.y_greedy


@pytest.mark.slow
def test_vc_window_for_binary_arrays():
    hits = 0
    for trial in range(30):
        arr = gen_word_array(128, 180, 2, SeedSpec(77).child(trial))
        if vc_dimension(arr, t_max=4, samples=2000, seed=SeedSpec(trial)) == 4:
            hits += 1
    assert hits >= 24
