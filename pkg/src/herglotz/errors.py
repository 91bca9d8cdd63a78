"""Exception types shared across the package."""


class UnsupportedDegreeError(ValueError):
    """Requested special-function degree exceeds the supported cap."""


class OutOfDomainError(ValueError):
    """A point (or the sphere of radius k) lies outside an interpolation grid."""


class GridMismatchError(ValueError):
    """Two fields were combined but live on different grids."""
