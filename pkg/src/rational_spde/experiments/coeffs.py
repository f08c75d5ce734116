"""Provide the coefficient table of the rational approximation.

Examples:

    >>> from rational_spde.experiments.coeffs import coefficient_table

    >>> table = coefficient_table(0.75, (1, 2))
    >>> table.columns
    ('m', 'b0', 'c0', 'b1', 'c1', 'b2', 'c2', 'b3')
    >>> table.rows[0][-2:]
    (None, None)

The module contains the following functions:
- `coefficient_table`: One row of normalized coefficients per degree.
"""

import logging
from typing import Iterable

from rational_spde.models.rational import build_fractional_rational
from rational_spde.view.renderer import Table

logger = logging.getLogger(__name__)


def coefficient_table(
    beta: float, m_list: Iterable[int], delta: float | None = None
) -> Table:
    """One row `m,b0,c0,b1,c1,...` per degree, normalized so that c_m = 1.

    Rows of smaller degrees leave the trailing cells empty.

    Args:
        beta (float): Exponent.
        m_list (Iterable[int]): Degrees.
        delta (float | None): Fitting interval end; defaults per degree.

    Returns:
        Table: The coefficients.
    """
    m_list = tuple(m_list)
    top = max(m_list)
    columns = ["m"]
    for i in range(top + 1):
        columns += [f"b{i}", f"c{i}"]
    columns.append(f"b{top + 1}")

    rows = []
    for m in m_list:
        ra = build_fractional_rational(beta, m, delta)
        row: list = [m]
        for i in range(top + 1):
            row.append(float(ra.b[i]) if i < len(ra.b) else None)
            row.append(float(ra.c[i]) if i < len(ra.c) else None)
        row.append(float(ra.b[top + 1]) if top + 1 < len(ra.b) else None)
        rows.append(tuple(row))
        logger.info("beta=%.4g m=%d sup error %.3e", beta, m, ra.sup_err)
    return Table(tuple(columns), tuple(rows))
