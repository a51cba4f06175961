"""Shared exception types."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent experiment configuration."""
