"""Shared exception types."""


class ParseError(ValueError):
    """Malformed input file (bad field count, non-numeric value, bad header)."""


class MeasurementError(RuntimeError):
    """Not enough signal content to measure (e.g. fewer than 2 edges)."""
