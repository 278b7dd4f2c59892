"""Exception hierarchy shared by all modules.

Every error carries the CLI exit code it maps to, so the command line layer
can translate failures without a lookup table.
"""


class AgriWsnError(Exception):
    exit_code = 3


class ConfigError(AgriWsnError, ValueError):
    """Invalid configuration value, unknown key or inconsistent section."""

    exit_code = 2


class ValidationError(ConfigError):
    """A structured input (matrix, multiplier vector, ...) failed validation."""


class DimensionError(ConfigError):
    """Field dimensions are not integer multiples of the cell edge."""


class DomainError(AgriWsnError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class OutOfBoundsError(DomainError):
    """A point lies outside the field."""


class BoundaryError(DomainError):
    """A generated node would fall outside the field."""


class FeasibilityError(AgriWsnError):
    """A link is longer than the child's radio range."""


class TopologyError(AgriWsnError):
    """The link graph has a cycle or references a missing parent."""


class ScaleError(AgriWsnError):
    """Instance too large for an exhaustive method."""


class ConvergenceError(AgriWsnError):
    pass
