"""Error types shared across the package.

All inherit ValueError so callers that only care about "bad input"
can catch a single class.
"""


class DegenerateFieldError(ValueError):
    """A field with zero selection weight was passed where a positive weight is required."""


class DegenerateDomainError(ValueError):
    """The ensemble carries no power in the requested detection domain."""


class DegenerateConfigurationError(ValueError):
    """A vanishing term makes the interference decomposition undefined."""
