"""Exception hierarchy shared across the package."""


class AplaLabError(Exception):
    """Base class for all package errors."""


class UsageError(AplaLabError):
    """An operation was called with arguments outside its contract."""


class ParameterError(AplaLabError):
    """Learning/analysis parameters violate a validity condition."""


class ConfigError(AplaLabError):
    """An experiment configuration file is missing, malformed, or invalid."""


class CapacityError(AplaLabError):
    """Exact enumeration was requested beyond the configured size cap."""


class GameStructureError(AplaLabError):
    """The game lacks a structural property required by the operation."""


class OracleMismatchError(AplaLabError):
    """Two independent computations of the same quantity disagree."""
