"""Adapter exception type."""


class AdapterError(Exception):
    """Raised for missing outputs, malformed files, or bad arguments."""
