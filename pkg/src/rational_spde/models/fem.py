"""Provide the piecewise linear finite element matrices of the operator
L u = -div(H grad u) + kappa^2 u.

Examples:

    >>> import numpy as np
    >>> from rational_spde.models.fem import (
    ...     CoefficientField, assemble, normalize_spectrum
    ... )
    >>> from rational_spde.models.flags import BoundaryCondition
    >>> from rational_spde.models.mesh import build_rect_mesh

    >>> mesh = build_rect_mesh(1, 1)
    >>> ops = assemble(mesh, CoefficientField(kappa2=1.0))
    >>> round(float(ops.C.sum()), 12), ops.n
    (1.0, 4)
    >>> bool(np.allclose(ops.G @ np.ones(4), 0.0))
    True
    >>> ops.bc
    <BoundaryCondition.NEUMANN: 'neumann'>

    >>> scaled = normalize_spectrum(ops, 1.0)
    >>> scaled.scale
    1.0

The module contains the following classes:
- `CoefficientField`: The coefficients kappa^2(s) and H(s) of the operator.
- `FemOperators`: Assembled mass, lumped mass, stiffness and operator matrices.

The module contains the following functions:
- `assemble`: Assembles the matrices on a mesh.
- `normalize_spectrum`: Rescales L so its spectrum starts at one.
- `matern_operators`: Operators of the Matérn model for a given kappa.
- `element_gradients`: Gradients of the barycentric basis on every triangle.
- `validate_coefficients`: Checks the coefficient values at quadrature points.
"""

import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, TypeAlias

import numpy as np
from scipy import sparse

from rational_spde.errors import MeshError, ValidationError
from rational_spde.linalg.sparse_core import as_csr
from rational_spde.models.flags import BoundaryCondition
from rational_spde.models.mesh import TriMesh

logger = logging.getLogger(__name__)

ScalarField: TypeAlias = Callable[[np.ndarray], np.ndarray]
TensorField: TypeAlias = Callable[[np.ndarray], np.ndarray]

# Edge midpoints in barycentric coordinates, weight 1/3 each.
EDGE_MIDPOINTS = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
REFERENCE_MASS = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


@dataclass(frozen=True)
class CoefficientField:
    """The coefficients of L u = -div(H grad u) + kappa^2 u.

    Attributes:
        kappa2: float | Callable
            kappa^2 as a constant, or a function mapping points of shape
            (k, 2) to values of shape (k,).
        H: float | np.ndarray | Callable
            Diffusivity: a multiple of the identity, a constant symmetric
            2x2 matrix, or a function mapping points of shape (k, 2) to
            matrices of shape (k, 2, 2).
    """

    kappa2: float | ScalarField = 0.0
    H: float | np.ndarray | TensorField = 1.0

    @property
    def is_constant(self) -> bool:
        """True when neither coefficient is a function."""
        return not callable(self.kappa2) and not callable(self.H)

    def kappa2_at(self, points: np.ndarray) -> np.ndarray:
        """kappa^2 at points of shape (k, 2)."""
        if callable(self.kappa2):
            return np.asarray(self.kappa2(points), dtype=float).reshape(len(points))
        return np.full(len(points), float(self.kappa2))

    def H_at(self, points: np.ndarray) -> np.ndarray:
        """H at points of shape (k, 2), as an array of shape (k, 2, 2)."""
        if callable(self.H):
            return np.asarray(self.H(points), dtype=float).reshape(len(points), 2, 2)
        H = np.asarray(self.H, dtype=float)
        if H.ndim == 0:
            H = float(H) * np.eye(2)
        return np.broadcast_to(H, (len(points), 2, 2))


@dataclass(frozen=True, eq=False)
class FemOperators:
    """Assembled finite element matrices on the degrees of freedom.

    With Dirichlet conditions the degrees of freedom are the interior nodes
    only; `dofs` maps them back to mesh nodes.

    Attributes:
        C: sparse.csr_matrix
            Consistent mass matrix.
        C_lumped: np.ndarray
            Diagonal of the lumped mass matrix, C̃_ii = sum_j C_ij.
        G: sparse.csr_matrix
            Stiffness matrix.
        L: sparse.csr_matrix
            Operator matrix, divided by `scale`.
        bc: BoundaryCondition
            Boundary condition used.
        dofs: np.ndarray
            Mesh node index of every degree of freedom.
        scale: float
            Factor L was divided by. Defaults to 1.
        kappa2_C: sparse.csr_matrix
            The kappa^2-weighted mass matrix, so that L = (kappa2_C + G)/scale.
        mesh: TriMesh | None
            The mesh the matrices were assembled on.

    Methods:
        n(self) -> int:
            Number of degrees of freedom.
        amplitude_factor(self, beta) -> float:
            The factor scale^beta that multiplies tau after normalization.
        restrict(self, A) -> sparse.csr_matrix:
            Keeps the columns of a node-based matrix that are degrees of freedom.
    """

    C: sparse.csr_matrix
    C_lumped: np.ndarray
    G: sparse.csr_matrix
    L: sparse.csr_matrix
    bc: BoundaryCondition
    dofs: np.ndarray
    kappa2_C: sparse.csr_matrix
    scale: float = 1.0
    mesh: TriMesh | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if not self.scale > 0:
            raise ValidationError(f"scale must be positive, got {self.scale}")
        if np.any(self.C_lumped <= 0):
            raise ValidationError("lumped mass has a nonpositive entry")

    @property
    def n(self) -> int:
        """Number of degrees of freedom."""
        return len(self.dofs)

    @cached_property
    def Ct(self) -> sparse.csr_matrix:
        """The lumped mass as a sparse diagonal matrix."""
        return sparse.diags(self.C_lumped, format="csr")

    @cached_property
    def Ct_inv(self) -> np.ndarray:
        """Inverse of the lumped mass diagonal."""
        return 1.0 / self.C_lumped

    def amplitude_factor(self, beta: float) -> float:
        """Returns scale^beta, the factor tau is multiplied by."""
        return float(self.scale**beta)

    def restrict(self, A: sparse.spmatrix) -> sparse.csr_matrix:
        """Keeps the columns of a mesh-node matrix that are degrees of freedom."""
        A = sparse.csr_matrix(A)
        n_nodes = self.mesh.n_nodes if self.mesh is not None else self.n
        if A.shape[1] == n_nodes:
            return as_csr(A[:, self.dofs]) if n_nodes != self.n else A
        if A.shape[1] == self.n:
            return A
        raise ValidationError(
            f"matrix has {A.shape[1]} columns, expected {n_nodes} mesh nodes"
        )

    def apply_A(self, x: np.ndarray) -> np.ndarray:
        """Applies C̃⁻¹L to a vector or to the columns of a matrix."""
        product = self.L @ x
        if np.ndim(product) == 1:
            return self.Ct_inv * product
        return self.Ct_inv[:, None] * product


def element_gradients(mesh: TriMesh) -> np.ndarray:
    """Gradients of the three barycentric functions on every triangle.

    Args:
        mesh (TriMesh): The mesh.

    Returns:
        np.ndarray: Array of shape (n_triangles, 3, 2).
    """
    v = mesh.vertices
    twice_area = 2.0 * mesh.areas
    x, y = v[:, :, 0], v[:, :, 1]
    gx = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    gy = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    return np.stack([gx, gy], axis=2) / twice_area[:, None, None]


def _assemble_global(mesh: TriMesh, local: np.ndarray) -> sparse.csr_matrix:
    """Sums element matrices and mirrors the upper triangle so the result is
    exactly symmetric."""
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    matrix = sparse.coo_matrix(
        (local.ravel(), (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)
    ).tocsr()
    upper = sparse.triu(matrix, format="csr")
    return as_csr(upper + sparse.triu(matrix, k=1, format="csr").T)


def _quadrature_points(mesh: TriMesh) -> np.ndarray:
    """Edge midpoints of every triangle, shape (n_triangles, 3, 2)."""
    return np.einsum("qk,tkd->tqd", EDGE_MIDPOINTS, mesh.vertices)


def validate_coefficients(kappa2: np.ndarray, H: np.ndarray) -> None:
    """Checks kappa^2 >= 0 and H symmetric positive definite.

    Args:
        kappa2 (np.ndarray): Values of kappa^2, shape (k,).
        H (np.ndarray): Values of H, shape (k, 2, 2).

    Raises:
        ValidationError: On a negative kappa^2 or a non-SPD H.
    """
    if not np.all(np.isfinite(kappa2)) or np.any(kappa2 < 0):
        raise ValidationError("kappa^2 must be finite and nonnegative")
    if not np.allclose(H, np.swapaxes(H, 1, 2), rtol=1e-12, atol=0.0):
        raise ValidationError("H is not symmetric")
    determinant = H[:, 0, 0] * H[:, 1, 1] - H[:, 0, 1] * H[:, 1, 0]
    if np.any(H[:, 0, 0] <= 0) or np.any(determinant <= 0):
        raise ValidationError("H is not positive definite")


def assemble(
    mesh: TriMesh,
    coeff: CoefficientField,
    bc: BoundaryCondition = BoundaryCondition.NEUMANN,
) -> FemOperators:
    """Assembles mass, lumped mass, stiffness and operator matrices.

    Constant coefficients use the exact element integrals. Varying
    coefficients are integrated with the three edge-midpoint rule, which is
    exact for quadratics.

    Args:
        mesh (TriMesh): The mesh.
        coeff (CoefficientField): kappa^2 and H.
        bc (BoundaryCondition): Boundary condition. Defaults to Neumann.

    Raises:
        ValidationError: On inadmissible coefficients.
        MeshError: When a Dirichlet problem has no interior node.

    Returns:
        FemOperators: The matrices, unscaled.
    """
    bc = BoundaryCondition(bc)
    areas = mesh.areas
    grads = element_gradients(mesh)
    mass_local = areas[:, None, None] * REFERENCE_MASS

    if coeff.is_constant:
        kappa2 = float(coeff.kappa2)  # type: ignore[arg-type]
        H = coeff.H_at(np.zeros((1, 2)))
        validate_coefficients(np.array([kappa2]), H)
        stiff_local = areas[:, None, None] * np.einsum(
            "tid,de,tje->tij", grads, H[0], grads
        )
        C = _assemble_global(mesh, mass_local)
        G = _assemble_global(mesh, stiff_local)
        kappa2_C = as_csr(kappa2 * C)
    else:
        points = _quadrature_points(mesh)
        flat = points.reshape(-1, 2)
        kappa2 = coeff.kappa2_at(flat).reshape(mesh.n_triangles, 3)
        H = coeff.H_at(flat)
        validate_coefficients(kappa2.ravel(), np.asarray(H))
        H_mean = np.asarray(H).reshape(mesh.n_triangles, 3, 2, 2).mean(axis=1)
        stiff_local = areas[:, None, None] * np.einsum(
            "tid,tde,tje->tij", grads, H_mean, grads
        )
        weighted = np.einsum("tq,qi,qj->tij", kappa2, EDGE_MIDPOINTS, EDGE_MIDPOINTS)
        kappa2_local = areas[:, None, None] / 3.0 * weighted
        C = _assemble_global(mesh, mass_local)
        G = _assemble_global(mesh, stiff_local)
        kappa2_C = _assemble_global(mesh, kappa2_local)

    lumped = np.asarray(C.sum(axis=1)).ravel()
    dofs = np.arange(mesh.n_nodes)
    if bc is BoundaryCondition.DIRICHLET:
        dofs = mesh.interior_nodes
        if len(dofs) == 0:
            raise MeshError("Dirichlet problem on a mesh without interior nodes")
        C, G, kappa2_C = (as_csr(M[dofs][:, dofs]) for M in (C, G, kappa2_C))
        lumped = lumped[dofs]

    L = as_csr(kappa2_C + G)
    logger.debug(
        "assembled %s operators: n=%d nnz(L)=%d constant=%s",
        bc.value, len(dofs), L.nnz, coeff.is_constant,
    )
    return FemOperators(
        C=C, C_lumped=lumped, G=G, L=L, bc=bc, dofs=dofs, kappa2_C=kappa2_C, mesh=mesh
    )


def normalize_spectrum(ops: FemOperators, eigen_lower_bound: float) -> FemOperators:
    """Divides L by a lower bound of its generalized eigenvalues.

    The amplitude factor bound^beta is recorded through `scale` and applied
    when the model is built.

    Args:
        ops (FemOperators): The operators.
        eigen_lower_bound (float): A positive lower bound of the smallest
            eigenvalue of L with respect to C̃.

    Raises:
        ValidationError: When the bound is not positive.

    Returns:
        FemOperators: Operators with L / bound and scale multiplied by bound.
    """
    if not eigen_lower_bound > 0:
        raise ValidationError(f"eigenvalue bound must be positive, got {eigen_lower_bound}")
    if eigen_lower_bound == 1.0:
        return ops
    return replace(
        ops,
        L=as_csr(ops.L / eigen_lower_bound),
        scale=ops.scale * eigen_lower_bound,
    )


def matern_operators(base: FemOperators, kappa: float) -> FemOperators:
    """Operators of the Matérn model (kappa^2 - Delta) on the spaces of `base`.

    Reuses the mass and stiffness matrices of `base`, forms
    L = kappa^2 C + G and normalizes by kappa^2, so that the scaled operator
    is C + G / kappa^2.

    Args:
        base (FemOperators): Operators assembled with H = I, any kappa^2,
            and scale 1.
        kappa (float): Positive range parameter.

    Returns:
        FemOperators: Normalized operators.
    """
    if not kappa > 0:
        raise ValidationError(f"kappa must be positive, got {kappa}")
    kappa2 = float(kappa) ** 2
    kappa2_C = as_csr(kappa2 * base.C)
    ops = replace(base, L=as_csr(kappa2_C + base.G), kappa2_C=kappa2_C, scale=1.0)
    return normalize_spectrum(ops, kappa2)
