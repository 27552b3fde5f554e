"""Exception types shared across the package."""


class ProtonasError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ProtonasError):
    """Raised when a run configuration is malformed or inconsistent."""


class ShapeCollapse(ProtonasError):
    """Raised when a layer's spatial extent would fall below one."""


class ShapeMismatch(ProtonasError):
    """Raised when tensor shapes are inconsistent with the graph."""


class DimensionMismatch(ProtonasError):
    """Raised when objective vectors disagree on dimensionality."""


class InfeasibleK(ProtonasError):
    """Raised when a subset size k cannot be satisfied."""


class DegenerateSeries(ProtonasError):
    """Raised when a rank correlation is undefined (a constant series)."""
