"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Array shapes do not match what an operation expects."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class NumericalError(ArithmeticError):
    """A numerical kernel (eigensolver, root finder) failed."""
