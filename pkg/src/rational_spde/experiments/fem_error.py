"""Provide the finite element covariance errors and computing times.

On the unit square with Neumann conditions, the covariance between the
midpoint and every node is compared with the Matérn covariance:

    (sum_j (C(|s* - s_j|) - Sigma_j*)^2 / sum_j C(|s* - s_j|)^2)^(1/2).

Rows cover the rational approximations of a fractional exponent and, for
reference, the non-fractional models with integer exponents. Wall-clock
times are taken for one sample and for log|Q_xy| with noisy observations at
random locations, sigma = 1.

The module contains the following functions:
- `midpoint_error`: The relative covariance error at the midpoint.
- `fem_error_table`: Rows `n,h,method,order,error,sample_seconds,logdet_seconds`.
"""

import logging
import time
from typing import Iterable

import numpy as np

from rational_spde.experiments.field import matern_model
from rational_spde.inference.posterior import posterior
from rational_spde.models.fem import CoefficientField, assemble
from rational_spde.models.matern import MaternParams
from rational_spde.models.mesh import build_rect_mesh
from rational_spde.models.observations import ObservationSet
from rational_spde.models.spde import SpdeModel, covariance_column, sample
from rational_spde.oracle.covariance import matern_cov
from rational_spde.view.renderer import Table

logger = logging.getLogger(__name__)

COLUMNS: tuple[str, ...] = (
    "n", "h", "method", "order", "error", "sample_seconds", "logdet_seconds",
)


def midpoint_error(model: SpdeModel, params: MaternParams) -> float:
    """Relative error of the covariance column of the node nearest the
    center of the mesh rectangle."""
    mesh = model.ops.mesh
    center = mesh.rect.center if mesh.rect is not None else tuple(mesh.nodes.mean(axis=0))
    node = mesh.nearest_node(center)
    dof = int(np.searchsorted(model.ops.dofs, node))
    column = covariance_column(model, dof)
    distances = np.linalg.norm(mesh.nodes[model.ops.dofs] - mesh.nodes[node], axis=1)
    exact = matern_cov(distances, params)
    return float(np.sqrt(np.sum((exact - column) ** 2) / np.sum(exact**2)))


def _timings(
    model: SpdeModel, obs: ObservationSet, rng: np.random.Generator
) -> tuple[float, float]:
    start = time.perf_counter()
    sample(model, 1, rng)
    sampled = time.perf_counter()
    post = posterior(model, obs, 1.0)
    _ = post.factor.logdet
    return sampled - start, time.perf_counter() - sampled


def fem_error_table(
    node_counts: Iterable[int],
    m_list: Iterable[int],
    standard_betas: Iterable[int] = (2, 3, 4),
    beta: float = 0.75,
    practical_range: float = 0.1,
    n_locations: int = 1000,
    seed: int = 0,
) -> Table:
    """Covariance errors and computing times on a sequence of meshes.

    Args:
        node_counts (Iterable[int]): Nodes per side of each mesh.
        m_list (Iterable[int]): Rational degrees for `beta`.
        standard_betas (Iterable[int]): Integer exponents of the reference
            rows.
        beta (float): Fractional exponent. Defaults to 3/4.
        practical_range (float): Practical range, unit variance. Defaults to 0.1.
        n_locations (int): Random observation locations. Defaults to 1000.
        seed (int): Seed of the locations and samples.

    Returns:
        Table: One row per mesh and model.
    """
    rng = np.random.default_rng(seed)
    m_list, standard_betas = tuple(m_list), tuple(standard_betas)
    rows = []
    for count in node_counts:
        mesh = build_rect_mesh(count - 1, count - 1)
        base = assemble(mesh, CoefficientField(kappa2=0.0))
        locations = rng.uniform(0.0, 1.0, size=(n_locations, 2))
        obs = ObservationSet.build(mesh, locations, np.zeros(n_locations), 1.0)
        cases = [("rational", m, beta) for m in m_list]
        cases += [("standard", b, float(b)) for b in standard_betas]
        for method, order, exponent in cases:
            params = MaternParams.from_range(practical_range, 2.0 * exponent - 1.0)
            m = order if method == "rational" else 1
            model = matern_model(mesh, params, m, base=base)
            error = midpoint_error(model, params)
            sample_seconds, logdet_seconds = _timings(model, obs, rng)
            logger.info(
                "n=%d^2 %s %s: error=%.4g sample=%.3fs logdet=%.3fs",
                count, method, order, error, sample_seconds, logdet_seconds,
            )
            rows.append(
                (mesh.n_nodes, mesh.h, method, order, error, sample_seconds, logdet_seconds)
            )
    return Table(COLUMNS, tuple(rows))
