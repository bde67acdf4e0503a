"""
Exception types raised across the simulation library.
All of them are ValueErrors so callers that only care about bad input can
catch the built-in type.
"""


class DomainError(ValueError):
    """An argument lies outside the domain of a numeric operation."""


class ConfigurationError(ValueError):
    """A configuration, geometry or channel profile is inconsistent."""


class FramingError(ValueError):
    """A sample sequence does not match the expected block framing."""


class UsageError(ValueError):
    """A sweep or command-line request cannot be carried out."""
