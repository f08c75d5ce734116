"""Provide the Matérn models on meshes that the experiments share.

The module contains the following functions:
- `matern_model`: The rational model of Matérn parameters on a mesh.
- `node_values`: Degree-of-freedom values extended to all mesh nodes.
- `sample_table`: Seeded samples, one field per row.
"""

import logging

import numpy as np

from rational_spde.models.fem import CoefficientField, FemOperators, assemble, matern_operators
from rational_spde.models.flags import BoundaryCondition
from rational_spde.models.matern import MaternParams
from rational_spde.models.mesh import TriMesh
from rational_spde.models.rational import cached_rational
from rational_spde.models.spde import SpdeModel, build_model, sample
from rational_spde.view.renderer import Table

logger = logging.getLogger(__name__)


def matern_model(
    mesh: TriMesh,
    params: MaternParams,
    m: int = 1,
    bc: BoundaryCondition = BoundaryCondition.NEUMANN,
    delta: float | None = None,
    base: FemOperators | None = None,
) -> SpdeModel:
    """The rational model of degree m for Matérn parameters.

    Args:
        mesh (TriMesh): The mesh.
        params (MaternParams): Parameters; beta and tau derive from them.
        m (int): Rational degree. Defaults to 1.
        bc (BoundaryCondition): Boundary condition. Defaults to Neumann.
        delta (float | None): Fitting interval end.
        base (FemOperators | None): Operators already assembled on `mesh`
            with H = I, reused when given.

    Returns:
        SpdeModel: The model.
    """
    if base is None:
        base = assemble(mesh, CoefficientField(kappa2=0.0), bc)
    ops = matern_operators(base, params.kappa)
    ra = cached_rational(params.beta, m, delta)
    return build_model(ops, params.beta, m, tau=params.tau, ra=ra)


def node_values(model: SpdeModel, values: np.ndarray) -> np.ndarray:
    """Places degree-of-freedom values, shape (..., n), on all mesh nodes;
    nodes without a degree of freedom get zero."""
    values = np.asarray(values, dtype=float)
    mesh = model.ops.mesh
    if mesh is None or model.n == mesh.n_nodes:
        return values
    out = np.zeros(values.shape[:-1] + (mesh.n_nodes,))
    out[..., model.ops.dofs] = values
    return out


def sample_table(model: SpdeModel, n_samples: int, seed: int) -> Table:
    """Seeded samples, one field per row, nodes in mesh order."""
    fields = node_values(model, sample(model, n_samples, seed))
    columns = tuple(f"u{i}" for i in range(fields.shape[1]))
    logger.info("drew %d samples of %d nodes", n_samples, fields.shape[1])
    return Table(columns, tuple(tuple(row) for row in fields.tolist()))
