"""Shared exception types."""


class DomainError(ValueError):
    """An argument is outside the domain an operation is defined on."""
