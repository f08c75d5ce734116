"""Provide the quadrature approximation of the fractional inverse.

For 0 < beta < 1,

    L^(-beta) = (2 sin(pi beta)/pi) int e^(2 beta y) (I + e^(2y) L)^(-1) dy,

discretized with step k on the nodes y_j = j k, j = -K_minus..K_plus. The
baseline is applied either as the direct sum of shifted solves or in
operator form, as a ratio of polynomials in A = C̃⁻¹L whose factors are
interleaved so that each step stays bounded.

Examples:

    >>> from rational_spde.models.quadrature import node_counts, step_for_nodes

    >>> node_counts(0.5, 1.0)
    (5, 5)
    >>> k = step_for_nodes(0.75, 12)
    >>> sum(node_counts(0.75, k)) + 1
    12

The module contains the following classes:
- `QuadratureModel`: The quadrature rule bound to finite element operators.

The module contains the following functions:
- `node_counts`: K_minus and K_plus for a step.
- `quadrature_rule`: Shifts c_j and weights w_j.
- `build_quadrature_model`: Builds the model.
- `apply`: Direct-sum application.
- `apply_operator_form`: Operator-form application.
- `quadrature_symbol`: The scalar function approximating lambda^(-beta).
- `step_for_nodes`: A step giving exactly K nodes.
- `step_for_mesh`: A step balancing the finite element error.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from rational_spde.errors import ValidationError
from rational_spde.linalg.sparse_core import CholFactor, as_csr, cholesky
from rational_spde.models.fem import FemOperators

logger = logging.getLogger(__name__)

MAX_QUADRATURE_NODES: int = 100_000


def validate_beta_step(beta: float, k: float) -> None:
    """Checks 0 < beta < 1 and k > 0.

    Raises:
        ValidationError: On arguments out of range.
    """
    if not 0.0 < beta < 1.0:
        raise ValidationError(f"quadrature exponent must lie in (0, 1), got {beta}")
    if not k > 0.0:
        raise ValidationError(f"step must be positive, got {k}")


def node_counts(beta: float, k: float) -> tuple[int, int]:
    """K_minus = ceil(pi^2/(4 beta k^2)) and K_plus = ceil(pi^2/(4 (1-beta) k^2))."""
    validate_beta_step(beta, k)
    base = math.pi**2 / (4.0 * k * k)
    return math.ceil(base / beta), math.ceil(base / (1.0 - beta))


def quadrature_rule(beta: float, k: float) -> tuple[np.ndarray, np.ndarray]:
    """Shifts c_j = e^(2 y_j) and weights 2k sin(pi beta)/pi e^(2 beta y_j).

    Raises:
        ValidationError: When the rule has more than 10^5 nodes.

    Returns:
        tuple[np.ndarray, np.ndarray]: Shifts ascending, and weights.
    """
    k_minus, k_plus = node_counts(beta, k)
    if k_minus + k_plus + 1 > MAX_QUADRATURE_NODES:
        raise ValidationError(
            f"step {k} needs {k_minus + k_plus + 1} nodes, cap is {MAX_QUADRATURE_NODES}"
        )
    y = k * np.arange(-k_minus, k_plus + 1)
    weights = 2.0 * k * math.sin(math.pi * beta) / math.pi * np.exp(2.0 * beta * y)
    return np.exp(2.0 * y), weights


def quadrature_symbol(beta: float, k: float, lam) -> np.ndarray:
    """sum_j w_j / (1 + c_j lambda), the quadrature value of lambda^(-beta)."""
    shifts, weights = quadrature_rule(beta, k)
    lam = np.asarray(lam, dtype=float)
    return np.sum(weights / (1.0 + shifts * lam[..., None]), axis=-1)


@dataclass(frozen=True, eq=False)
class QuadratureModel:
    """The quadrature rule on finite element operators.

    Attributes:
        ops: FemOperators
            Spectrum-normalized operators.
        beta: float
            Exponent in (0, 1).
        k: float
            Step size.

    Methods:
        K_minus(self), K_plus(self) -> int:
            Node counts.
        shifts(self), weights(self) -> np.ndarray:
            c_j and w_j.
        solvers(self) -> list[CholFactor]:
            Factors of C̃ + c_j L.
        numerator_roots(self) -> np.ndarray:
            Zeros of the operator-form numerator.
    """

    ops: FemOperators
    beta: float
    k: float

    def __post_init__(self) -> None:
        quadrature_rule(self.beta, self.k)

    @property
    def K_minus(self) -> int:
        """Number of nodes below zero."""
        return node_counts(self.beta, self.k)[0]

    @property
    def K_plus(self) -> int:
        """Number of nodes above zero."""
        return node_counts(self.beta, self.k)[1]

    @property
    def K(self) -> int:
        """Total number of nodes."""
        return self.K_minus + self.K_plus + 1

    @cached_property
    def shifts(self) -> np.ndarray:
        """c_j, ascending."""
        return quadrature_rule(self.beta, self.k)[0]

    @cached_property
    def weights(self) -> np.ndarray:
        """w_j."""
        return quadrature_rule(self.beta, self.k)[1]

    @cached_property
    def solvers(self) -> list[CholFactor]:
        """Cholesky factors of C̃ + c_j L."""
        return [cholesky(as_csr(self.ops.Ct + c * self.ops.L)) for c in self.shifts]

    @cached_property
    def numerator_roots(self) -> np.ndarray:
        """The K - 1 zeros of sum_j w_j/(1 + c_j lambda), ascending.

        Zero i lies between the poles -1/c_i and -1/c_(i+1), where the sum
        decreases from +inf to -inf.
        """
        poles = -1.0 / self.shifts

        def g(lam: float) -> float:
            return float(np.sum(self.weights / (1.0 + self.shifts * lam)))

        roots = []
        for left, right in zip(poles[:-1], poles[1:]):
            width = right - left
            roots.append(
                brentq(g, left + 1e-12 * width, right - 1e-12 * width, xtol=1e-300)
            )
        return np.array(roots)


def build_quadrature_model(ops: FemOperators, beta_residual: float, k: float) -> QuadratureModel:
    """Binds the quadrature rule for exponent `beta_residual` and step k to
    the operators."""
    model = QuadratureModel(ops=ops, beta=float(beta_residual), k=float(k))
    logger.debug("quadrature model beta=%.4g k=%.4g K=%d", model.beta, model.k, model.K)
    return model


def apply(model: QuadratureModel, v: np.ndarray) -> np.ndarray:
    """sum_j w_j (C̃ + c_j L)⁻¹ C̃ v."""
    v = np.asarray(v, dtype=float)
    load = model.ops.C_lumped * v if v.ndim == 1 else model.ops.C_lumped[:, None] * v
    out = np.zeros_like(load)
    for weight, solver in zip(model.weights, model.solvers):
        out += weight * solver.solve(load)
    return out


def apply_operator_form(model: QuadratureModel, v: np.ndarray) -> np.ndarray:
    """The same operator written as a ratio of polynomials in A.

    With zeros rho_i of the scalar rule g,

        g(lambda) = g(1) prod_i (lambda - rho_i)/(1 - rho_i)
                         prod_j (1 + c_j)/(1 + c_j lambda),

    applied as alternating denominator solves and numerator products.
    """
    v = np.asarray(v, dtype=float)
    ops = model.ops
    Ct = ops.C_lumped if v.ndim == 1 else ops.C_lumped[:, None]
    g_one = float(np.sum(model.weights / (1.0 + model.shifts)))
    x = v
    for j, (c, solver) in enumerate(zip(model.shifts, model.solvers)):
        x = (1.0 + c) * solver.solve(Ct * x)
        if j < len(model.numerator_roots):
            rho = model.numerator_roots[j]
            x = (ops.apply_A(x) - rho * x) / (1.0 - rho)
    return g_one * x


def step_for_nodes(beta: float, K: int) -> float:
    """A step k whose rule has exactly K nodes.

    The node count is piecewise constant in k; among the k-intervals with
    count K this returns the midpoint of the one with the largest k.

    Raises:
        ValidationError: When no step gives exactly K nodes.
    """
    validate_beta_step(beta, 1.0)
    a = math.pi**2 / (4.0 * beta)
    b = math.pi**2 / (4.0 * (1.0 - beta))
    breaks = sorted(
        {math.sqrt(a / n) for n in range(1, K + 1)}
        | {math.sqrt(b / n) for n in range(1, K + 1)}
    )
    edges = [0.5 * breaks[0]] + breaks + [2.0 * breaks[-1]]
    for low, high in reversed(list(zip(edges[:-1], edges[1:]))):
        middle = 0.5 * (low + high)
        if sum(node_counts(beta, middle)) + 1 == K:
            return middle
    raise ValidationError(f"no step gives exactly {K} nodes for beta={beta}")


def step_for_mesh(h: float, beta: float) -> float:
    """k = -pi^2/(4 beta ln h), matching the quadrature error to h^(2 beta)."""
    if not 0.0 < h < 1.0:
        raise ValidationError(f"mesh width must lie in (0, 1), got {h}")
    validate_beta_step(beta, 1.0)
    return -math.pi**2 / (4.0 * beta * math.log(h))
