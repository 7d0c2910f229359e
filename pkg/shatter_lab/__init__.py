"""Random covering arrays, permutation families and their shattering thresholds."""

from .core import ArrayKind, ColumnTuple, PermArray, WordArray
from .randgen import SeedSpec, gen_perm_array, gen_word_array
from .shatter import count_unshattered, is_covering, vc_dimension

__all__ = [
    "ArrayKind",
    "ColumnTuple",
    "PermArray",
    "SeedSpec",
    "WordArray",
    "count_unshattered",
    "gen_perm_array",
    "gen_word_array",
    "is_covering",
    "vc_dimension",
]
