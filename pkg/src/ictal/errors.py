"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericError -> 4.
"""


class IctalError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(IctalError):
    """Invalid or inconsistent configuration."""


class DataError(IctalError):
    """Malformed, missing, or out-of-contract input data."""


class NumericError(IctalError):
    """Numerical failure (divergence, non-finite values, dead messages)."""


class EdfError(DataError):
    """Malformed EDF byte stream; message carries the byte offset."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset
