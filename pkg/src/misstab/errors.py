"""Error types shared across the package."""


class TableError(ValueError):
    """Raised for malformed, inconsistent, or unsupported table data."""


class ComputationError(RuntimeError):
    """Raised when a numeric procedure cannot produce a usable result."""
