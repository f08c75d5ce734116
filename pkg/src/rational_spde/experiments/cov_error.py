"""Provide the covariance errors of the non-discretized approximations.

For every smoothness nu, the covariance on the plane of each rational
approximation and of the quadrature baseline is compared with the Matérn
covariance on [0, error_range].

The module contains the following functions:
- `cov_error_table`: Rows `nu,m,l2,linf,method`.
"""

import logging
from typing import Iterable

from rational_spde.models.matern import MaternParams
from rational_spde.models.rational import cached_rational
from rational_spde.oracle.covariance import ERROR_GRID, cov_errors, matern_cov
from rational_spde.oracle.spectral import (
    QUADRATURE_NODES,
    quadrature_spectral_model,
    rational_spectral_model,
)
from rational_spde.view.renderer import Table

logger = logging.getLogger(__name__)

COLUMNS: tuple[str, ...] = ("nu", "m", "l2", "linf", "method")


def cov_error_table(
    nu_grid: Iterable[float],
    m_list: Iterable[int],
    practical_range: float = 1.0,
    error_range: float = 2.0,
    n_points: int = ERROR_GRID,
    quadrature_nodes: int | None = QUADRATURE_NODES,
    delta: float | None = None,
) -> Table:
    """L2 and sup errors of the covariances of the approximations.

    Args:
        nu_grid (Iterable[float]): Smoothness values.
        m_list (Iterable[int]): Rational degrees.
        practical_range (float): Practical correlation range. Defaults to 1.
        error_range (float): Upper end of the distance interval. Defaults to 2.
        n_points (int): Grid points. Defaults to 2000.
        quadrature_nodes (int | None): Nodes of the quadrature baseline, None
            to skip it. Defaults to 12.
        delta (float | None): Fitting interval end of the rational
            approximations.

    Returns:
        Table: Rows `nu,m,l2,linf,method`; for the quadrature rows m is the
            node count.
    """
    rows = []
    for nu in nu_grid:
        params = MaternParams.from_range(practical_range, nu)

        def exact(h, params=params):
            return matern_cov(h, params)

        models = [
            (m, "rational", rational_spectral_model(params, cached_rational(params.beta, m, delta)))
            for m in m_list
        ]
        if quadrature_nodes is not None:
            models.append(
                (quadrature_nodes, "quadrature", quadrature_spectral_model(params, quadrature_nodes))
            )
        for m, method, model in models:
            l2, linf = cov_errors(model.covariance, exact, error_range, n_points)
            logger.info("nu=%.4g %s m=%d: l2=%.3e linf=%.3e", nu, method, m, l2, linf)
            rows.append((float(nu), m, l2, linf, method))
    return Table(COLUMNS, tuple(rows))
