"""Exception types shared across the package.

The CLI maps each class onto a process exit code.
"""


class MaxPersError(Exception):
    exit_code = 1


class InvalidInputError(MaxPersError, ValueError):
    """Bad arguments or malformed data."""

    exit_code = 1


class UnsupportedConfigurationError(InvalidInputError):
    """A valid request the implementation cannot honour (e.g. torus radius too large)."""


class TruncationExhaustedError(MaxPersError):
    """The radius cap kept cutting bars short after every allowed retry."""

    exit_code = 3
