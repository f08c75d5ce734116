"""Provide the empirical convergence rate in the mesh width.

Two errors are measured on nested unit-square meshes with 2^i n0 cells per
side, both relative and on the scale of the field.

The covariance error compares the model covariance at the nodes of the
coarsest mesh, which every finer mesh shares, with the exact covariance of
the Neumann problem from `neumann_matern_cov`. It is the square root of the
relative Frobenius error of the covariance matrix, so its rate compares
with the strong rate min(2 beta - d/2, 2).

The strong error drives each mesh with the same white noise as a reference
field on a mesh two levels finer: the load vector of a coarse mesh is the
prolongation transpose applied to the reference load. The mean-square L2
distance to the reference is estimated from seeded coupled samples.

The module contains the following classes:
- `ConvergenceResult`: The errors and the fitted slope.

The module contains the following functions:
- `covariance_errors`: Errors against the exact covariance on nested meshes.
- `strong_errors`: Relative mean-square errors on nested meshes.
- `convergence_table`: Rows `cells,h,error,slope,strong_error,strong_slope,m,suggested_m`.
"""

import logging
from dataclasses import dataclass

import numpy as np

from rational_spde.errors import ValidationError
from rational_spde.experiments.field import matern_model
from rational_spde.models.matern import MaternParams
from rational_spde.models.mesh import basis_eval_matrix, build_rect_mesh
from rational_spde.models.rational import suggest_degree
from rational_spde.models.spde import covariance_column
from rational_spde.oracle.covariance import neumann_matern_cov, relative_frobenius
from rational_spde.view.renderer import Table

logger = logging.getLogger(__name__)

COLUMNS: tuple[str, ...] = (
    "cells", "h", "error", "slope", "strong_error", "strong_slope", "m", "suggested_m",
)
REFERENCE_LEVELS: int = 2
DEFAULT_SAMPLES: int = 100


@dataclass(frozen=True, eq=False)
class ConvergenceResult:
    """Errors on h-halving meshes and the least-squares slope.

    Attributes:
        cells: tuple[int, ...]
            Cells per side of each mesh.
        h: np.ndarray
            Mesh widths.
        errors: np.ndarray
            Relative errors.
        slope: float
            Slope of log error against log h.
    """

    cells: tuple[int, ...]
    h: np.ndarray
    errors: np.ndarray
    slope: float


def _fit(cells: tuple[int, ...], widths: list[float], errors: list[float]) -> ConvergenceResult:
    h, errors = np.array(widths), np.array(errors)
    slope = float(np.polyfit(np.log(h), np.log(errors), 1)[0])
    logger.info("fitted rate %.3f", slope)
    return ConvergenceResult(cells, h, errors, slope)


def covariance_errors(
    params: MaternParams, coarsest: int = 4, levels: int = 4, m: int = 3
) -> ConvergenceResult:
    """Covariance errors at the coarsest nodes against the exact covariance.

    Args:
        params (MaternParams): Parameters of the field.
        coarsest (int): Cells per side of the coarsest mesh. Defaults to 4.
        levels (int): Number of meshes. Defaults to 4.
        m (int): Rational degree on every mesh. Defaults to 3.

    Returns:
        ConvergenceResult: Square roots of the relative Frobenius errors and
            their slope.
    """
    points = build_rect_mesh(coarsest, coarsest).nodes
    exact = neumann_matern_cov(points, params)

    cells = tuple(coarsest * 2**i for i in range(levels))
    widths, errors = [], []
    for count in cells:
        mesh = build_rect_mesh(count, count)
        model = matern_model(mesh, params, m)
        nodes = [mesh.nearest_node(point) for point in points]
        approx = np.column_stack([covariance_column(model, node)[nodes] for node in nodes])
        widths.append(mesh.h)
        errors.append(float(np.sqrt(relative_frobenius(approx, exact))))
        logger.info("cells=%d h=%.4g covariance error %.4g", count, mesh.h, errors[-1])
    return _fit(cells, widths, errors)


def strong_errors(
    params: MaternParams,
    coarsest: int = 4,
    levels: int = 4,
    m: int = 3,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> ConvergenceResult:
    """Relative mean-square errors against a coupled reference field.

    Args:
        params (MaternParams): Parameters of the field.
        coarsest (int): Cells per side of the coarsest mesh. Defaults to 4.
        levels (int): Number of meshes. Defaults to 4.
        m (int): Rational degree on every mesh. Defaults to 3.
        n_samples (int): Coupled samples. Defaults to 100.
        seed (int): Seed of the white noise.

    Returns:
        ConvergenceResult: Errors and slope.
    """
    reference_cells = coarsest * 2 ** (levels - 1 + REFERENCE_LEVELS)
    reference_mesh = build_rect_mesh(reference_cells, reference_cells)
    reference = matern_model(reference_mesh, params, m)
    rng = np.random.default_rng(seed)
    load = np.sqrt(reference.ops.C_lumped)[:, None] * rng.standard_normal(
        (reference.n, n_samples)
    )
    u_ref = reference.P_r @ reference.solve_P_l(load)
    mass = reference.ops.C
    norm2 = np.mean(np.sum(u_ref * (mass @ u_ref), axis=0))

    cells = tuple(coarsest * 2**i for i in range(levels))
    widths, errors = [], []
    for count in cells:
        mesh = build_rect_mesh(count, count)
        model = matern_model(mesh, params, m)
        prolongation = basis_eval_matrix(mesh, reference_mesh.nodes)
        u = prolongation @ (model.P_r @ model.solve_P_l(prolongation.T @ load))
        difference = u_ref - u
        error2 = np.mean(np.sum(difference * (mass @ difference), axis=0))
        widths.append(mesh.h)
        errors.append(float(np.sqrt(error2 / norm2)))
        logger.info("cells=%d h=%.4g relative error %.4g", count, mesh.h, errors[-1])

    return _fit(cells, widths, errors)


def convergence_table(
    covariance: ConvergenceResult, strong: ConvergenceResult, beta: float, m: int
) -> Table:
    """One row per mesh with both errors and the degree suggested for its
    width; the slopes are repeated on every row."""
    if covariance.cells != strong.cells:
        raise ValidationError("both studies must use the same meshes")
    rows = tuple(
        (
            count, float(h), float(error), covariance.slope,
            float(strong_error), strong.slope, m, suggest_degree(float(h), beta),
        )
        for count, h, error, strong_error in zip(
            covariance.cells, covariance.h, covariance.errors, strong.errors
        )
    )
    return Table(COLUMNS, rows)
