import pytest

from rational_spde.errors import (
    ComplexRootError,
    LocateError,
    MeshError,
    NotPositiveDefiniteError,
    NumericalError,
    RationalSpdeError,
    ShapeError,
    SingularMatrixError,
    ValidationError,
)


class TestHierarchy:
    @pytest.mark.parametrize("error", [MeshError, LocateError, ShapeError])
    def test_input_errors_are_validation_errors(self, error):
        assert issubclass(error, ValidationError)
        assert issubclass(error, ValueError)

    @pytest.mark.parametrize(
        "error", [NotPositiveDefiniteError, SingularMatrixError, ComplexRootError]
    )
    def test_failures_are_numerical_errors(self, error):
        assert issubclass(error, NumericalError)
        assert issubclass(error, RationalSpdeError)

    def test_families_are_disjoint(self):
        assert not issubclass(NumericalError, ValidationError)
        assert not issubclass(ValidationError, NumericalError)


class TestMessages:
    def test_locate_error_names_the_point(self):
        error = LocateError(3, (1.5, -0.25))
        assert error.index == 3
        assert error.point == (1.5, -0.25)
        assert "point #3" in str(error)

    def test_pivot_error(self):
        assert "pivot 4" in str(NotPositiveDefiniteError(4, -1.0))
        assert "broke down" in str(NotPositiveDefiniteError(None, 0.0))
