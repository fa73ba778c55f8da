"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for input/validation problems, 3 for numerical failures, 4 for bad
experiment configuration.
"""


class HdctError(Exception):
    exit_code = 2


class ValidationError(HdctError, ValueError):
    exit_code = 2


class NumericalError(HdctError, ArithmeticError):
    exit_code = 3


class NonPositiveEntry(ValidationError):
    def __init__(self, row, col, value=0.0):
        self.row = int(row)
        self.col = int(col)
        self.value = float(value)
        super().__init__(
            f"non-positive entry {self.value!r} at row {self.row}, col {self.col}"
        )


class RowSumViolation(ValidationError):
    def __init__(self, row, observed):
        self.row = int(row)
        self.observed = float(observed)
        super().__init__(f"row {self.row} sums to {self.observed!r}, expected 1")


class NonFiniteEntry(ValidationError):
    def __init__(self, row, col):
        self.row = int(row)
        self.col = int(col)
        super().__init__(f"non-finite entry at row {self.row}, col {self.col}")


class RowSumNonZero(ValidationError):
    def __init__(self, row, observed):
        self.row = int(row)
        self.observed = float(observed)
        super().__init__(f"clr row {self.row} sums to {self.observed!r}, expected 0")


class ShapeError(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class TooFewSamples(ValidationError):
    pass


class NonCenteredMu0(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class NonSymmetric(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, row, col, message):
        self.row = row
        self.col = col
        super().__init__(f"parse error at row {row}, col {col}: {message}")


class GroupError(ValidationError):
    pass


class DegenerateVariance(NumericalError):
    def __init__(self, column, variance):
        self.column = int(column)
        self.variance = float(variance)
        super().__init__(
            f"column {self.column} has degenerate variance {self.variance!r}"
        )


class NegativeVarianceEstimate(NumericalError):
    pass


class NonPositiveDiagonal(NumericalError):
    pass


class NotPSD(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class ConfigError(HdctError):
    exit_code = 4


class ReplicationError(HdctError):
    """A single Monte-Carlo replication failed; carries its provenance."""

    exit_code = 3

    def __init__(self, replication, stream_id, cause):
        self.replication = replication
        self.stream_id = stream_id
        self.cause = cause
        super().__init__(
            f"replication {replication} (stream {stream_id}) failed: {cause}"
        )
