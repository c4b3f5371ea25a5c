"""Exception and warning types shared across the toolkit."""


class DomainError(ValueError):
    """A numeric input lies outside the domain an operation is defined on."""


class ConfigError(ValueError):
    """A run configuration is missing a section or holds an invalid value."""

    def __init__(self, section: str, message: str):
        self.section = section
        super().__init__(f"[{section}] {message}")


class DispersionRangeWarning(UserWarning):
    """A frequency fell in the extrapolation zone of a Taylor branch."""


class PatternTruncationWarning(UserWarning):
    """A waveguide length was truncated to a whole number of poling periods."""


class OptimizerBoundaryWarning(UserWarning):
    """A 1-D search terminated on the bracket boundary, not at an interior optimum."""
