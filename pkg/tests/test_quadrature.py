import math

import numpy as np
import pytest

from rational_spde.errors import ValidationError
from rational_spde.models.quadrature import (
    apply,
    apply_operator_form,
    build_quadrature_model,
    node_counts,
    quadrature_rule,
    quadrature_symbol,
    step_for_mesh,
    step_for_nodes,
)
from rational_spde.oracle.covariance import generalized_eigen


class TestRule:
    @pytest.mark.parametrize(
        "beta, k",
        [(0.25, 1.0), (0.5, 0.7), (0.75, 0.5), (0.1, 1.3), (0.9, 0.9),
         (0.3, 0.35), (0.6, 2.0), (0.45, 0.8), (0.7, 1.1), (0.05, 0.6)],
    )
    def test_node_counts_follow_the_ceiling_formulas(self, beta, k):
        k_minus, k_plus = node_counts(beta, k)
        assert k_minus == math.ceil(math.pi**2 / (4 * beta * k * k))
        assert k_plus == math.ceil(math.pi**2 / (4 * (1 - beta) * k * k))
        shifts, weights = quadrature_rule(beta, k)
        assert len(shifts) == len(weights) == k_minus + k_plus + 1

    def test_symbol_approximates_inverse_power(self):
        lam = np.geomspace(1.0, 1e4, 40)
        np.testing.assert_allclose(quadrature_symbol(0.75, 0.3, lam) * lam**0.75, 1.0, atol=1e-4)

    @pytest.mark.parametrize("beta, k", [(0.0, 1.0), (1.0, 1.0), (0.5, 0.0)])
    def test_rejects(self, beta, k):
        with pytest.raises(ValidationError):
            node_counts(beta, k)

    def test_node_cap(self):
        with pytest.raises(ValidationError):
            quadrature_rule(0.5, 0.005)


class TestSteps:
    @pytest.mark.parametrize("K", [5, 12, 20])
    def test_step_for_nodes(self, K):
        k = step_for_nodes(0.75, K)
        assert sum(node_counts(0.75, k)) + 1 == K

    def test_step_for_nodes_without_solution(self):
        with pytest.raises(ValidationError):
            step_for_nodes(0.5, 2)

    def test_step_for_mesh(self):
        assert step_for_mesh(0.1, 0.5) == pytest.approx(math.pi**2 / (2 * math.log(10.0)))
        with pytest.raises(ValidationError):
            step_for_mesh(2.0, 0.5)


class TestApplication:
    @pytest.fixture
    def quadrature(self, matern_ops):
        return build_quadrature_model(matern_ops, 0.75, step_for_nodes(0.75, 12))

    def test_operator_form_equals_direct_sum(self, quadrature):
        rng = np.random.default_rng(12)
        for _ in range(20):
            v = rng.standard_normal(quadrature.ops.n)
            direct = apply(quadrature, v)
            operator = apply_operator_form(quadrature, v)
            assert np.linalg.norm(operator - direct) <= 1e-9 * np.linalg.norm(direct)

    def test_matches_spectral_definition(self, quadrature):
        eigenvalues, V = generalized_eigen(quadrature.ops)
        v = np.random.default_rng(4).standard_normal(quadrature.ops.n)
        coefficients = V.T @ (quadrature.ops.C_lumped * v)
        expected = V @ (quadrature_symbol(0.75, quadrature.k, eigenvalues) * coefficients)
        np.testing.assert_allclose(apply(quadrature, v), expected, rtol=1e-8, atol=1e-10)

    def test_numerator_roots_separate_poles(self, quadrature):
        poles = -1.0 / quadrature.shifts
        roots = quadrature.numerator_roots
        assert len(roots) == quadrature.K - 1
        assert np.all((roots > poles[:-1]) & (roots < poles[1:]))

    def test_error_decreases_with_step(self, matern_ops):
        eigenvalues, V = generalized_eigen(matern_ops)
        v = np.random.default_rng(8).standard_normal(matern_ops.n)
        exact = V @ (eigenvalues**-0.5 * (V.T @ (matern_ops.C_lumped * v)))
        errors = [
            np.linalg.norm(apply(build_quadrature_model(matern_ops, 0.5, k), v) - exact)
            for k in (1.0, 0.5)
        ]
        assert errors[1] < errors[0]
