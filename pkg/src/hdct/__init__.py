"""Mean tests for high-dimensional compositional data.

Sum-type, max-type and combined (min-p) one- and two-sample tests on
centered log-ratio coordinates, plus the simulation machinery used to study
their size and power.
"""

__version__ = "0.1.0"

from .clr import center_rows, clr_from_log_basis, clr_transform
from .core import ClrMatrix, CompositionMatrix, LogBasisMatrix, close, validate_composition
from .meantests import (
    Family,
    TestOutcome,
    combo_test_one,
    combo_test_two,
    max_test_one,
    max_test_two,
    one_sample_tests,
    sum_test_one,
    sum_test_two,
    theoretical_power_sum,
    two_sample_tests,
)

__all__ = [
    "ClrMatrix",
    "CompositionMatrix",
    "Family",
    "LogBasisMatrix",
    "TestOutcome",
    "center_rows",
    "close",
    "clr_from_log_basis",
    "clr_transform",
    "combo_test_one",
    "combo_test_two",
    "max_test_one",
    "max_test_two",
    "one_sample_tests",
    "sum_test_one",
    "sum_test_two",
    "theoretical_power_sum",
    "two_sample_tests",
    "validate_composition",
]
