"""Exception hierarchy shared by all plcsim modules."""

from __future__ import annotations


class PLCError(Exception):
    """Base class for every error raised by plcsim."""


class NotPrime(PLCError, ValueError):
    pass


class FieldTooSmall(PLCError, ValueError):
    pass


class FieldMismatch(PLCError, ValueError):
    pass


class Unsolvable(PLCError, ArithmeticError):
    pass


class InvalidParameters(PLCError, ValueError):
    pass


class RateMatrixError(PLCError, ValueError):
    """A candidate rate matrix violates one of its defining conditions."""


class NonUniformColumnWeight(RateMatrixError):
    def __init__(self, column: int, weight: int, expected: int):
        self.column, self.weight, self.expected = column, weight, expected
        super().__init__(
            f"column {column} has weight {weight}, expected {expected}"
        )


class RowLacksInformationSet(RateMatrixError):
    def __init__(self, row: int, support: tuple[int, ...]):
        self.row, self.support = row, support
        super().__init__(
            f"row {row} has support {set(support) or '{}'} which contains no information set"
        )


class NotFound(PLCError, LookupError):
    pass


class IndexOutOfRange(PLCError, IndexError):
    pass


class NotDivisible(PLCError, ArithmeticError):
    pass


class NoSource(PLCError, LookupError):
    pass


class UnreconstructiblePrune(PLCError, ArithmeticError):
    pass


class DecodeFailure(PLCError, ArithmeticError):
    pass


class InternalMismatch(PLCError, AssertionError):
    pass


class BudgetExceeded(PLCError, RuntimeError):
    pass


class ConfigError(PLCError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
