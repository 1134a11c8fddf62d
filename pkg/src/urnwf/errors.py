"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of the operation."""


class DegenerateUrnError(DomainError):
    """A season was requested from an urn that cannot produce one (w = b = 0, f > 0)."""


class CoverageError(LookupError):
    """A table lookup fell outside the indices the table was built to cover."""


class InfeasibleSizeError(ValueError):
    """A requested problem size exceeds the operation's configured bound."""


class EmptyRegionError(ValueError):
    """A lattice sweep found no points inside the requested region."""
