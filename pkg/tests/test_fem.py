import numpy as np
import pytest
from scipy import sparse

from rational_spde.errors import ValidationError
from rational_spde.linalg.sparse_core import is_symmetric
from rational_spde.models.fem import (
    CoefficientField,
    assemble,
    matern_operators,
    normalize_spectrum,
)
from rational_spde.models.flags import BoundaryCondition
from rational_spde.models.mesh import build_rect_mesh
from rational_spde.oracle.covariance import generalized_eigen


class TestAssemble:
    def test_mass_and_stiffness(self, unit_mesh):
        ops = assemble(unit_mesh, CoefficientField(kappa2=0.0))
        assert ops.C.sum() == pytest.approx(1.0)
        assert ops.C_lumped.sum() == pytest.approx(1.0)
        np.testing.assert_allclose(ops.C_lumped, np.asarray(ops.C.sum(axis=1)).ravel())
        np.testing.assert_allclose(ops.G @ np.ones(ops.n), 0.0, atol=1e-12)
        assert is_symmetric(ops.C) and is_symmetric(ops.G)

    def test_energy_of_linear_functions(self, unit_mesh):
        ops = assemble(unit_mesh, CoefficientField(kappa2=0.0))
        x, y = unit_mesh.nodes[:, 0], unit_mesh.nodes[:, 1]
        assert x @ (ops.G @ x) == pytest.approx(1.0)
        assert (x + y) @ (ops.G @ (x + y)) == pytest.approx(2.0)

    def test_anisotropic_diffusion(self, unit_mesh):
        ops = assemble(unit_mesh, CoefficientField(H=np.diag([2.0, 1.0])))
        x, y = unit_mesh.nodes[:, 0], unit_mesh.nodes[:, 1]
        assert x @ (ops.G @ x) == pytest.approx(2.0)
        assert y @ (ops.G @ y) == pytest.approx(1.0)

    def test_varying_path_matches_constant_path(self, unit_mesh):
        constant = assemble(unit_mesh, CoefficientField(kappa2=2.0, H=np.diag([2.0, 1.0])))
        varying = assemble(
            unit_mesh,
            CoefficientField(
                kappa2=lambda p: np.full(len(p), 2.0),
                H=lambda p: np.broadcast_to(np.diag([2.0, 1.0]), (len(p), 2, 2)),
            ),
        )
        np.testing.assert_allclose(varying.L.toarray(), constant.L.toarray(), atol=1e-12)
        np.testing.assert_allclose(varying.kappa2_C.toarray(), 2.0 * constant.C.toarray(), atol=1e-12)

    def test_dirichlet_restricts_to_interior(self, unit_mesh):
        full = assemble(unit_mesh, CoefficientField(kappa2=1.0))
        ops = assemble(unit_mesh, CoefficientField(kappa2=1.0), BoundaryCondition.DIRICHLET)
        assert ops.n == 9
        np.testing.assert_array_equal(ops.dofs, unit_mesh.interior_nodes)
        np.testing.assert_allclose(ops.C_lumped, full.C_lumped[ops.dofs])
        np.testing.assert_allclose(
            ops.L.toarray(), full.L.toarray()[np.ix_(ops.dofs, ops.dofs)]
        )

    @pytest.mark.parametrize(
        "coeff",
        [
            CoefficientField(kappa2=-1.0),
            CoefficientField(H=np.array([[1.0, 1.0], [0.0, 1.0]])),
            CoefficientField(H=np.array([[1.0, 2.0], [2.0, 1.0]])),
        ],
    )
    def test_rejects_bad_coefficients(self, unit_mesh, coeff):
        with pytest.raises(ValidationError):
            assemble(unit_mesh, coeff)


class TestOperators:
    def test_matern_operators_normalize_by_kappa2(self, base_ops):
        ops = matern_operators(base_ops, 3.0)
        assert ops.scale == pytest.approx(9.0)
        assert ops.amplitude_factor(0.75) == pytest.approx(9.0**0.75)
        expected = base_ops.C + base_ops.G / 9.0
        np.testing.assert_allclose(ops.L.toarray(), expected.toarray(), atol=1e-12)

    def test_normalize_spectrum_rejects_nonpositive_bound(self, base_ops):
        with pytest.raises(ValidationError):
            normalize_spectrum(base_ops, 0.0)
        with pytest.raises(ValidationError):
            matern_operators(base_ops, -1.0)

    def test_apply_A(self, matern_ops):
        v = np.linspace(0.0, 1.0, matern_ops.n)
        expected = (matern_ops.L @ v) / matern_ops.C_lumped
        np.testing.assert_allclose(matern_ops.apply_A(v), expected)
        block = matern_ops.apply_A(np.column_stack([v, v]))
        np.testing.assert_allclose(block[:, 1], expected)

    def test_restrict(self, unit_mesh):
        ops = assemble(unit_mesh, CoefficientField(kappa2=1.0), BoundaryCondition.DIRICHLET)
        A = unit_mesh.basis_matrix([(0.5, 0.5)])
        assert ops.restrict(A).shape == (1, ops.n)
        with pytest.raises(ValidationError):
            ops.restrict(sparse.csr_matrix((1, 3)))

    @pytest.mark.parametrize("kappa2", [1.0, 4.0])
    def test_normalized_spectrum_is_bounded_below_by_one(self, kappa2):
        ops = assemble(build_rect_mesh(3, 3), CoefficientField(kappa2=kappa2))
        eigenvalues, _ = generalized_eigen(normalize_spectrum(ops, kappa2))
        assert eigenvalues[0] >= 1.0 - 1e-10
