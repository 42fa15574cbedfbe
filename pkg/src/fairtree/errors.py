"""Exception types shared across the package.

The CLI maps ConfigError to exit code 1 and DataError to exit code 2;
everything else is a bug and propagates with a traceback.
"""


class FairtreeError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(FairtreeError):
    """Invalid configuration (bad flag values, malformed config files)."""

    exit_code = 1


class DataError(FairtreeError):
    """Invalid or unreadable input data (CSV contents, missing columns)."""

    exit_code = 2


class ModelFormatError(FairtreeError):
    """Malformed model document. Carries the path to the offending node."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class EnumerationLimitError(FairtreeError):
    """Exact path enumeration was asked to descend past its depth limit."""
