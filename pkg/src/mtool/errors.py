from __future__ import annotations


class MtoolError(Exception):
    """Base class for every error raised by the library."""


class DepthExceeded(MtoolError):
    pass


class DepthMismatch(MtoolError):
    pass


class NotAnIsometry(MtoolError):
    pass


class NotStrictlyPositive(MtoolError):
    pass


class RangeMismatch(MtoolError):
    def __init__(self, value, partial=None):
        super().__init__(f"no target node with hat-measure {value}")
        self.value = value
        self.partial = partial


class ImproperIdeal(MtoolError):
    pass


class OutOfRange(MtoolError):
    pass


class NotRepresentable(MtoolError):
    pass


class BudgetExceeded(MtoolError):
    pass


class StageBudgetExceeded(BudgetExceeded):
    pass


class ValidationError(MtoolError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ParseError(MtoolError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
