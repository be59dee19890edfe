"""Shared exception types and exit codes."""


class DocgraphError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(DocgraphError):
    """Invalid configuration value or config file (exit code 2)."""


class DataError(DocgraphError):
    """Malformed or missing input data (exit code 3)."""


class NumericalError(DocgraphError):
    """Numerical failure: non-finite values, degenerate systems (exit code 4)."""


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4
