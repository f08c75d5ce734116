import math

import numpy as np
import pytest

from rational_spde.errors import ComplexRootError, DegenerateApproximationError, ValidationError
from rational_spde.models.rational import (
    MAX_DEGREE,
    build_fractional_rational,
    cached_rational,
    chebyshev_coefficients,
    clenshaw_lord,
    default_delta,
    evaluate,
    evaluate_roots,
    operator_symbol,
    poly_roots,
    suggest_degree,
)

# Known coefficients for beta = 3/4, normalized so that c_m = 1, in the
# order b0, c0, b1, c1, ...
KNOWN_COEFFICIENTS = {
    1: [1.69e-2, 7.69e-2, 8.06e-1, 1.0, 2.57e-1],
    2: [8.08e-4, 5.30e-3, 1.98e-1, 4.05e-1, 1.07, 1.0, 1.41e-1],
    3: [3.72e-5, 3.27e-4, 3.03e-2, 8.57e-2, 6.84e-1, 1.00, 1.28, 1.0, 9.17e-2],
}


def interleaved(ra):
    values = []
    for i in range(len(ra.b)):
        values.append(ra.b[i])
        if i < len(ra.c):
            values.append(ra.c[i])
    return values


class TestCoefficients:
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_known_coefficients(self, m):
        ra = build_fractional_rational(0.75, m)
        assert ra.delta == pytest.approx(10 ** (-(5 + m) / 2))
        np.testing.assert_allclose(interleaved(ra), KNOWN_COEFFICIENTS[m], rtol=5e-3)

    def test_normalized_and_accurate(self):
        fit = clenshaw_lord(-0.25, 2, 1e-3)
        assert fit.c[-1] == 1.0
        assert len(fit.c) == 3 and len(fit.b) == 4
        x = np.linspace(1e-3, 1.0, 500)
        error = np.abs(x**-0.25 - np.polyval(fit.c[::-1], x) / np.polyval(fit.b[::-1], x))
        assert error.max() <= 1.01 * fit.sup_err

    def test_error_decreases_with_degree(self):
        errors = [build_fractional_rational(0.75, m, 1e-4).sup_err for m in (1, 2, 3)]
        assert all(a > b for a, b in zip(errors, errors[1:]))

    def test_chebyshev_series_reproduces_function(self):
        a = chebyshev_coefficients(0.4, 1e-2)
        series = np.polynomial.Chebyshev(a, domain=[1e-2, 1.0])
        x = np.linspace(1e-2, 1.0, 101)
        np.testing.assert_allclose(series(x), x**0.4, atol=1e-12)

    @pytest.mark.parametrize("args", [(1.0, 1, 0.1), (-0.5, 0, 0.1), (-0.5, 1, 1.5)])
    def test_clenshaw_lord_rejects(self, args):
        with pytest.raises(ValidationError):
            clenshaw_lord(*args)

    def test_singular_system(self):
        with pytest.raises(DegenerateApproximationError):
            clenshaw_lord(-0.25, 12, 0.5)


class TestRoots:
    def test_roots_are_real_and_outside_the_interval(self):
        for m in (1, 2, 3):
            ra = build_fractional_rational(0.75, m)
            for roots in (ra.r1, ra.r2):
                assert np.all(np.isreal(roots))
                assert not np.any((roots >= ra.delta) & (roots <= 1.0))

    def test_monomial_and_root_forms_agree(self):
        ra = build_fractional_rational(1.4, 2)
        x = np.geomspace(ra.delta, 1.0, 50)
        np.testing.assert_allclose(evaluate_roots(ra, x), evaluate(ra, x), rtol=1e-8)

    def test_poly_roots(self):
        np.testing.assert_allclose(poly_roots([-6.0, 11.0, -6.0, 1.0]), [1.0, 2.0, 3.0])
        with pytest.raises(ComplexRootError):
            poly_roots([1.0, 0.0, 1.0])
        with pytest.raises(ValidationError):
            poly_roots([1.0, 0.0])


class TestBuild:
    @pytest.mark.parametrize("beta, m_beta", [(0.75, 1), (1.4, 1), (2.3, 2)])
    def test_split_of_beta(self, beta, m_beta):
        ra = build_fractional_rational(beta, 2)
        assert ra.m_beta == m_beta
        assert ra.beta_hat == pytest.approx(beta - m_beta)
        assert -1.0 < ra.beta_hat < 1.0

    def test_integer_beta_is_exact(self):
        ra = build_fractional_rational(2.0, 3)
        assert ra.is_exact and ra.extra_powers == 2
        lam = np.array([1.0, 2.0, 10.0])
        np.testing.assert_allclose(operator_symbol(ra, lam), lam**-2.0)

    @pytest.mark.parametrize("beta", [0.6, 0.75, 1.4, 2.3])
    def test_symbol_approximates_inverse_power(self, beta):
        ra = build_fractional_rational(beta, 2)
        lam = np.geomspace(1.0, 1.0 / ra.delta, 200)
        bound = 2.0 * ra.sup_err * max(1.0, ra.delta ** (-ra.beta_hat))
        np.testing.assert_allclose(operator_symbol(ra, lam) * lam**beta, 1.0, atol=bound)
        np.testing.assert_allclose(
            operator_symbol(ra, lam), evaluate(ra, 1.0 / lam) * lam ** (-ra.m_beta), rtol=1e-8
        )

    @pytest.mark.parametrize("beta, m", [(0.5, 1), (0.75, 0)])
    def test_rejects(self, beta, m):
        with pytest.raises(ValidationError):
            build_fractional_rational(beta, m)

    def test_cache_returns_same_object(self):
        assert cached_rational(0.75, 2) is cached_rational(0.75 + 1e-14, 2)

    def test_default_delta(self):
        assert default_delta(1) == pytest.approx(1e-3)
        with pytest.raises(ValidationError):
            default_delta(0)


class TestSuggestDegree:
    def test_meshes_of_the_error_table(self):
        widths = [math.sqrt(2.0) / (n - 1) for n in (57, 85, 115)]
        assert [suggest_degree(h, 0.75) for h in widths] == [6, 7, 8]

    def test_grows_as_h_shrinks(self):
        degrees = [suggest_degree(h, 0.75) for h in (0.2, 0.05, 0.01, 0.001)]
        assert degrees == sorted(degrees)

    def test_edges(self):
        assert suggest_degree(0.1, 2.0) == 1
        assert suggest_degree(1e-30, 0.6) == MAX_DEGREE
        with pytest.raises(ValidationError):
            suggest_degree(1.0, 0.75)
