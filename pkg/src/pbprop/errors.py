"""Shared exception types."""


class CapabilityError(TypeError):
    """An operation was invoked with a satisfaction function lacking a
    required capability (e.g. additivity)."""


class GuardExceededError(RuntimeError):
    """An exact but exponential procedure was invoked beyond its size guard."""
