"""Common configuration for the shattering-threshold toolkit.

Every value here is a default; the CLI overrides them through flags only.
"""

from __future__ import annotations

# Maximum number of unshattered tuples kept in a CoverageReport.
DEFAULT_WITNESS_CAP = 10_000

# Largest unshattered-tuple count the exact disjoint-packing search accepts.
EXACT_DISJOINT_LIMIT = 25

# Longest permutation pattern whose factorial still fits a machine word.
MAX_PATTERN_LENGTH = 12

# Constant A multiplying lg lg n in the lower word threshold.
DEFAULT_A_CONST = 1.0

# Multiplicative slack applied to asymptotic correlation bounds in Monte Carlo checks.
DEFAULT_MC_SLACK = 1.5

# Binomial standard deviations allowed on top of the slack in Monte Carlo checks.
CONFIDENCE_SIGMAS = 4.0

# Two-sided alpha of the Wilson score interval (0.05 -> 95%).
WILSON_ALPHA = 0.05

# Trials drawn from one derived generator; fixed so results never depend on worker count.
TRIAL_BLOCK_SIZE = 256

# Upper bound on numpy elements materialised per tuple chunk or per batch of trial arrays.
TUPLE_CHUNK_ELEMENTS = 1 << 22

# Relative tolerance for floating-point equality in closed-form checks.
REL_TOLERANCE = 1e-12

# Seed used when the caller does not supply one.
DEFAULT_SEED = 0

# Version tag written into JSON coverage reports.
REPORT_SCHEMA_VERSION = 1

# Column order of scan CSV files.
SCAN_CSV_FIELDS = (
    "kind",
    "n",
    "q",
    "t",
    "k",
    "trials",
    "successes",
    "p_hat",
    "ci_low",
    "ci_high",
    "seed",
)

# Significant digits used when serialising floats to CSV.
FLOAT_DIGITS = 17

# Default stderr log level of the command-line frontend.
DEFAULT_LOG_LEVEL = "WARNING"
