"""Error types shared across the toolkit.

ConfigError and DataError are user-facing (CLI exit code 2);
anything else escaping to the CLI is an internal failure (exit code 1).
"""


class EbscError(Exception):
    pass


class ConfigError(EbscError):
    """Bad configuration: unknown level, missing file, invalid parameter."""


class DataError(EbscError):
    """Invalid input data; carries file/line context when available."""

    def __init__(self, message, path=None, line=None):
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class UnresolvedLocationError(DataError):
    """Gazetteer returned no usable result; the record is quarantined."""
