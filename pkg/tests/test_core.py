import itertools

import numpy as np
import pytest

from shatter_lab.core import (
    ColumnTuple,
    InvalidInputError,
    ParameterError,
    PatternId,
    PermArray,
    RangeError,
    WordArray,
    decode_pattern,
    encode_patterns,
    encode_words,
    pattern_id,
    word_from_id,
    word_id,
)


def test_pattern_id_of_identity_and_reversal():
    assert pattern_id((1, 2, 3)).id == 0
    assert pattern_id((3, 2, 1)).id == 5
    assert pattern_id((2, 3, 1)) == PatternId(t=3, id=3)


def test_pattern_id_is_order_isomorphism_invariant():
    assert pattern_id((0.7, 0.3, 0.9, 0.1)) == pattern_id((3, 2, 4, 1))


def test_pattern_ids_are_a_bijection_on_s4():
    perms = list(itertools.permutations(range(1, 5)))
    ids = [pattern_id(p).id for p in perms]
    assert sorted(ids) == list(range(24))
    assert all(decode_pattern(pattern_id(p)) == p for p in perms)


def test_pattern_id_rejects_duplicates_and_bad_lengths():
    with pytest.raises(InvalidInputError):
        pattern_id((1, 1, 2))
    with pytest.raises(RangeError):
        pattern_id(tuple(range(13)))
    with pytest.raises(RangeError):
        pattern_id(())


def test_pattern_id_range_is_checked():
    with pytest.raises(InvalidInputError):
        PatternId(t=3, id=6)


def test_encode_patterns_matches_scalar_rank():
    rows = np.array([[3, 2, 1], [1, 4, 2], [1, 3, 2], [5, 6, 7]])
    expected = [pattern_id(row).id for row in rows.tolist()]
    assert encode_patterns(rows).tolist() == expected


def test_word_ids():
    assert word_id((1, 0, 1), 2) == 5
    assert word_from_id(5, 2, 3) == (1, 0, 1)
    assert word_id((2, 1), 3) == 7
    assert encode_words(np.array([[1, 0, 1], [0, 0, 1]]), 2).tolist() == [5, 1]
    with pytest.raises(InvalidInputError):
        word_id((0, 2), 2)
    with pytest.raises(InvalidInputError):
        word_from_id(8, 2, 3)


class TestColumnTuple:
    def test_valid(self):
        cols = ColumnTuple((1, 3, 4))
        assert cols.t == 3
        assert cols.zero_based == (0, 2, 3)
        assert str(cols) == "(1,3,4)"
        assert ColumnTuple.from_zero_based(np.array([0, 2, 3])) == cols

    @pytest.mark.parametrize("indices", [(), (0, 1), (3, 1), (2, 2)])
    def test_invalid(self, indices):
        with pytest.raises(InvalidInputError):
            ColumnTuple(indices)

    def test_out_of_range(self):
        with pytest.raises(InvalidInputError):
            ColumnTuple((1, 5)).check_within(4)


class TestArrays:
    def test_word_array_shape(self):
        arr = WordArray.from_rows([[0, 1, 0], [1, 1, 0]], q=2)
        assert (arr.k, arr.n) == (2, 3)
        assert arr.arity(3) == 8
        assert not arr.cells.flags.writeable

    def test_word_array_rejects_bad_symbols(self):
        with pytest.raises(InvalidInputError):
            WordArray.from_rows([[0, 2]], q=2)
        with pytest.raises(ParameterError):
            WordArray.from_rows([[0, 0]], q=1)

    def test_ragged_rows(self):
        with pytest.raises(InvalidInputError):
            WordArray.from_rows([[0, 1], [0]], q=2)

    def test_empty_array_needs_n(self):
        arr = WordArray.from_rows([], q=2, n=3)
        assert (arr.k, arr.n) == (0, 3)
        with pytest.raises(ParameterError):
            PermArray.from_rows([])

    def test_perm_array_validates_rows(self):
        with pytest.raises(InvalidInputError, match="Row 2"):
            PermArray.from_rows([[1, 2, 3], [1, 1, 3]])
        assert PermArray.from_rows([[2, 3, 1]]).arity(3) == 6

    def test_with_rows_and_equality(self):
        arr = PermArray.from_rows([[1, 2, 3]])
        grown = arr.with_rows([[3, 2, 1]])
        assert grown.k == 2
        assert grown == PermArray.from_rows([[1, 2, 3], [3, 2, 1]])
        assert arr != grown
