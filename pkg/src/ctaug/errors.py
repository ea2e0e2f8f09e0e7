"""Exception types shared across the toolkit.

The CLI maps these onto its exit-code contract: ValidationError -> 1,
DataError -> 2.
"""


class CtaugError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(CtaugError):
    """Bad configuration, parameters, or inputs that violate a contract."""


class DataError(CtaugError):
    """Missing or undecodable data on disk."""
