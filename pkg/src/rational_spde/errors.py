"""Provide the exceptions raised by the rational SPDE package.

Errors split in two families: `ValidationError` for inputs that are wrong
before any computation starts, and `NumericalError` for computations that
fail on valid input. The command-line surface maps the first family to exit
code 2 and the second to exit code 1.

The module contains the following classes:
- `RationalSpdeError`: Base class of every package error.
- `ValidationError`: Invalid input or parameters.
- `MeshError`: Invalid mesh construction or mesh file.
- `LocateError`: A point lies outside the mesh hull.
- `ShapeError`: Incompatible matrix or vector shapes.
- `NumericalError`: A numerical computation failed.
- `NotPositiveDefiniteError`: A Cholesky pivot was not positive.
- `SingularMatrixError`: A matrix is numerically singular.
- `DegenerateApproximationError`: The Chebyshev-Pade system is singular.
- `ComplexRootError`: A polynomial has a genuinely complex root.
- `NonFiniteLikelihoodError`: A likelihood evaluated to a non-finite value.
"""


class RationalSpdeError(Exception):
    """Base class of every error raised by the package."""


class ValidationError(RationalSpdeError, ValueError):
    """Raised when inputs or parameters are invalid."""


class MeshError(ValidationError):
    """Raised when a mesh cannot be built or read."""


class LocateError(ValidationError):
    """Raised when a point lies outside the mesh hull.

    Attributes:
        index: int
            Position of the offending point in the queried list.
        point: tuple[float, float]
            Coordinates of the offending point.
    """

    def __init__(self, index: int, point: tuple[float, float]) -> None:
        self.index = index
        self.point = point
        super().__init__(
            f"point #{index} at ({point[0]:.6g}, {point[1]:.6g}) "
            "lies outside the mesh"
        )


class ShapeError(ValidationError):
    """Raised on incompatible matrix or vector shapes."""


class NumericalError(RationalSpdeError, ArithmeticError):
    """Raised when a numerical computation fails on valid input."""


class NotPositiveDefiniteError(NumericalError):
    """Raised when a Cholesky factorization meets a nonpositive pivot.

    Attributes:
        pivot: int
            Index (in the factored ordering) of the first bad pivot, None
            when the factorization broke down before reporting one.
    """

    def __init__(self, pivot: int | None, value: float) -> None:
        self.pivot = pivot
        self.value = value
        where = "factorization broke down" if pivot is None else f"pivot {pivot}"
        super().__init__(f"matrix is not positive definite: {where} ({value:.3e})")


class SingularMatrixError(NumericalError):
    """Raised when a matrix is numerically singular."""


class DegenerateApproximationError(NumericalError):
    """Raised when the denominator system of a Chebyshev-Pade fit is
    singular."""


class ComplexRootError(NumericalError):
    """Raised when a polynomial has a root that is genuinely complex."""


class NonFiniteLikelihoodError(NumericalError):
    """Raised when a likelihood evaluates to a non-finite value."""
