"""Shared exception types."""


class DecodeError(RuntimeError):
    """Soft-input evidence is degenerate (no configuration has mass)."""
