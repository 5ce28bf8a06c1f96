"""Exception hierarchy.

Each class carries the process exit code the command-line front end uses
when the error escapes a subcommand.
"""


class DiffRedError(Exception):
    exit_code = 1


class DataIOError(DiffRedError):
    """File could not be read, parsed or written."""

    exit_code = 2


class ParseError(DataIOError):
    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class ConfigError(DiffRedError, ValueError):
    """Invalid parameters: out-of-range dimensions, missing options, etc."""

    exit_code = 3


class NumericError(DiffRedError, ArithmeticError):
    """Degenerate numerical input (zero energy, zero rows, ...)."""

    exit_code = 4


class ZeroRowError(NumericError):
    def __init__(self, row):
        super().__init__(f"row {row} has zero Euclidean norm")
        self.row = row
