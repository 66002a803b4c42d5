"""Exception types shared across the package.

The CLI maps these onto process exit codes, so library code should raise
the most specific type that applies rather than bare ValueError.
"""


class QitekitError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(QitekitError):
    """Operands refer to different qubit counts or incompatible shapes."""


class PoolError(QitekitError):
    """Invalid operator-pool request (unknown kind, empty or out-of-range domain)."""


class ResourceError(QitekitError):
    """Requested problem size exceeds a configured resource ceiling."""


class NumericalError(QitekitError):
    """A numerical routine produced no usable result (no retained directions, non-finite values)."""


class DataFormatError(QitekitError):
    """A data file (coefficient table, config) could not be parsed."""


class ConfigError(QitekitError):
    """A run configuration is malformed or inconsistent."""
