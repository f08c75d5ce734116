"""Provide the discrete rational SPDE model.

With A = C̃⁻¹L the weights u of the field solve P_l x = W, u = P_r x where

    P_l = tau_tilde b_lead F_1 C̃⁻¹ F_2 ... C̃⁻¹ F_K,
    P_r = c_lead prod_i (I - r1_i A),

F_j = C̃ - r2_j L for the roots of the denominator, followed by
`RationalApprox.extra_powers` copies of L, and the load W has covariance C̃.
The latent precision is Q = P_lᵀ C̃⁻¹ P_l.

The module contains the following classes:
- `FactorSolver`: A factorized factor F_j of P_l.
- `SpdeModel`: The operator matrices of the model.

The module contains the following functions:
- `build_model`: Builds the model from operators and an exponent.
- `sample`: Draws fields from the model.
- `covariance_column`: One column of the field covariance.
- `dense_covariance`: The full covariance, for small meshes.
- `log_det_P_l`: log |P_l| from the individual factors.
- `prior_log_density`: Log density of the latent weights.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from rational_spde.errors import NotPositiveDefiniteError, ValidationError
from rational_spde.linalg.sparse_core import (
    CholFactor,
    LUFactor,
    as_csr,
    cholesky,
    lu,
    symmetrize,
)
from rational_spde.models.fem import FemOperators
from rational_spde.models.rational import RationalApprox, build_fractional_rational

logger = logging.getLogger(__name__)

DENSE_ORACLE_CAP: int = 500


@dataclass(frozen=True, eq=False)
class FactorSolver:
    """One factor F = C̃ - r L (or L itself) of P_l, factorized.

    Attributes:
        root: float | None
            The root r, None for the plain operator factor.
        matrix: sparse.csr_matrix
            The factor.
        factor: CholFactor | LUFactor
            Its Cholesky factor when positive definite, LU otherwise.
    """

    root: float | None
    matrix: sparse.csr_matrix
    factor: CholFactor | LUFactor

    @property
    def logabsdet(self) -> float:
        """log |det F|."""
        if isinstance(self.factor, CholFactor):
            return self.factor.logdet
        return self.factor.logabsdet

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solves F x = b."""
        return self.factor.solve(b)


def _factorize(root: float | None, matrix: sparse.csr_matrix) -> FactorSolver:
    if root is not None and root >= 0.0:
        logger.debug("factor with root %s may be indefinite; using LU", root)
        return FactorSolver(root, matrix, lu(matrix))
    try:
        return FactorSolver(root, matrix, cholesky(matrix))
    except NotPositiveDefiniteError:
        logger.warning("factor with root %s is not positive definite; using LU", root)
    return FactorSolver(root, matrix, lu(matrix))


@dataclass(frozen=True, eq=False)
class SpdeModel:
    """The discrete rational SPDE model.

    Attributes:
        ops: FemOperators
            Spectrum-normalized operators.
        ra: RationalApprox
            Rational approximation for the exponent beta.
        tau: float
            Amplitude of the unnormalized equation.
        P_l: sparse.csr_matrix
            Left operator matrix, amplitude included.
        P_r: sparse.csr_matrix
            Right operator matrix.
        factors: tuple[FactorSolver, ...]
            Factors F_1..F_K of P_l in product order.

    Methods:
        tau_tilde(self) -> float:
            Amplitude of the normalized equation.
        Q(self) -> sparse.csr_matrix:
            Latent precision.
        Q_factor(self) -> CholFactor:
            Cholesky factor of Q.
        solve_P_l(self, b) -> np.ndarray:
            Applies P_l⁻¹ through the factors.
        solve_P_lt(self, b) -> np.ndarray:
            Applies P_l⁻ᵀ through the factors.
    """

    ops: FemOperators
    ra: RationalApprox
    tau: float
    P_l: sparse.csr_matrix
    P_r: sparse.csr_matrix
    factors: tuple[FactorSolver, ...]

    @property
    def n(self) -> int:
        """Number of degrees of freedom."""
        return self.ops.n

    @property
    def beta(self) -> float:
        """The exponent."""
        return self.ra.beta

    @cached_property
    def tau_tilde(self) -> float:
        """tau scale^beta, the amplitude after spectrum normalization."""
        return self.tau * self.ops.amplitude_factor(self.ra.beta)

    @cached_property
    def lead(self) -> float:
        """Scalar in front of the factor product of P_l."""
        return self.tau_tilde * self.ra.b_lead

    @cached_property
    def Q(self) -> sparse.csr_matrix:
        """Latent precision P_lᵀ C̃⁻¹ P_l, exactly symmetric."""
        weighted = sparse.diags(self.ops.Ct_inv) @ self.P_l
        return symmetrize(self.P_l.T @ weighted)

    @cached_property
    def Q_factor(self) -> CholFactor:
        """Cholesky factor of Q."""
        return cholesky(self.Q)

    @cached_property
    def log_det_C_lumped(self) -> float:
        """log det C̃."""
        return float(np.sum(np.log(self.ops.C_lumped)))

    def _scale_rows(self, x: np.ndarray, weights: np.ndarray) -> np.ndarray:
        return weights * x if x.ndim == 1 else weights[:, None] * x

    def solve_P_l(self, b: np.ndarray) -> np.ndarray:
        """Returns P_l⁻¹ b = lead⁻¹ F_K⁻¹ C̃ ... C̃ F_1⁻¹ b."""
        x = self.factors[0].solve(np.asarray(b, dtype=float))
        for factor in self.factors[1:]:
            x = factor.solve(self._scale_rows(x, self.ops.C_lumped))
        return x / self.lead

    def solve_P_lt(self, b: np.ndarray) -> np.ndarray:
        """Returns P_l⁻ᵀ b = lead⁻¹ F_1⁻¹ C̃ ... C̃ F_K⁻¹ b."""
        x = self.factors[-1].solve(np.asarray(b, dtype=float))
        for factor in reversed(self.factors[:-1]):
            x = factor.solve(self._scale_rows(x, self.ops.C_lumped))
        return x / self.lead


def build_model(
    ops: FemOperators,
    beta: float,
    m: int = 1,
    tau: float = 1.0,
    delta: float | None = None,
    ra: RationalApprox | None = None,
) -> SpdeModel:
    """Builds P_l and P_r for the exponent beta.

    Args:
        ops (FemOperators): Spectrum-normalized operators.
        beta (float): Exponent.
        m (int): Rational degree. Defaults to 1.
        tau (float): Amplitude. Defaults to 1.
        delta (float | None): Fitting interval end; defaults by degree.
        ra (RationalApprox | None): A prebuilt approximation for (beta, m).

    Raises:
        ValidationError: On a nonpositive amplitude or a mismatched `ra`.
        NumericalError: When the rational fit or a factorization fails.

    Returns:
        SpdeModel: The model.
    """
    if not tau > 0:
        raise ValidationError(f"tau must be positive, got {tau}")
    if ra is None:
        ra = build_fractional_rational(beta, m, delta)
    elif abs(ra.beta - beta) > 1e-12:
        raise ValidationError(f"approximation is for beta={ra.beta}, not {beta}")

    Ct, L = ops.Ct, ops.L
    solvers = [_factorize(float(r), as_csr(Ct - r * L)) for r in ra.r2]
    if ra.extra_powers > 0:
        operator = _factorize(None, L)
        solvers.extend([operator] * ra.extra_powers)
    if not solvers:
        raise ValidationError("model needs at least one factor")

    Ct_inv = sparse.diags(ops.Ct_inv)
    product = solvers[0].matrix
    for solver in solvers[1:]:
        product = product @ Ct_inv @ solver.matrix
    amplitude = tau * ops.amplitude_factor(ra.beta) * ra.b_lead
    P_l = as_csr(amplitude * product)

    A = as_csr(Ct_inv @ L)
    identity = sparse.identity(ops.n, format="csr")
    P_r = identity
    for r in ra.r1:
        P_r = P_r @ (identity - r * A)
    P_r = as_csr(ra.c_lead * P_r)

    logger.debug(
        "built model beta=%.6g m=%d: %d factors, nnz(P_l)=%d nnz(P_r)=%d",
        ra.beta, ra.m, len(solvers), P_l.nnz, P_r.nnz,
    )
    return SpdeModel(
        ops=ops, ra=ra, tau=float(tau), P_l=P_l, P_r=P_r, factors=tuple(solvers)
    )


def log_det_P_l(model: SpdeModel) -> float:
    """log |P_l| = n log|lead| + sum_j log|det F_j| - (K - 1) log det C̃."""
    K = len(model.factors)
    return (
        model.n * np.log(abs(model.lead))
        + sum(solver.logabsdet for solver in model.factors)
        - (K - 1) * model.log_det_C_lumped
    )


def log_det_Q(model: SpdeModel) -> float:
    """log det Q = 2 log |P_l| - log det C̃."""
    return 2.0 * log_det_P_l(model) - model.log_det_C_lumped


def sample(model: SpdeModel, n_samples: int, seed: int | np.random.Generator) -> np.ndarray:
    """Draws fields u = P_r P_l⁻¹ C̃^(1/2) z with z standard normal.

    Args:
        model (SpdeModel): The model.
        n_samples (int): Number of fields, at least 1.
        seed (int | np.random.Generator): Seed or generator.

    Returns:
        np.ndarray: Samples of shape (n_samples, n), one field per row.
    """
    if n_samples < 1:
        raise ValidationError(f"need at least one sample, got {n_samples}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((model.n, n_samples))
    load = np.sqrt(model.ops.C_lumped)[:, None] * z
    x = model.solve_P_l(load)
    return np.asarray(model.P_r @ x).T


def covariance_column(model: SpdeModel, node: int) -> np.ndarray:
    """Column `node` of P_r P_l⁻¹ C̃ P_l⁻ᵀ P_rᵀ.

    Args:
        model (SpdeModel): The model.
        node (int): Degree-of-freedom index.

    Raises:
        ValidationError: When the index is out of range.

    Returns:
        np.ndarray: The column, length n.
    """
    if not 0 <= node < model.n:
        raise ValidationError(f"node {node} out of range [0, {model.n})")
    unit = np.zeros(model.n)
    unit[node] = 1.0
    return _apply_covariance(model, unit)


def _apply_covariance(model: SpdeModel, v: np.ndarray) -> np.ndarray:
    w = model.solve_P_lt(model.P_r.T @ v)
    w = model._scale_rows(w, model.ops.C_lumped)
    return model.P_r @ model.solve_P_l(w)


def dense_covariance(model: SpdeModel) -> np.ndarray:
    """The full covariance matrix, for at most 500 degrees of freedom."""
    if model.n > DENSE_ORACLE_CAP:
        raise ValidationError(f"dense covariance limited to {DENSE_ORACLE_CAP} nodes")
    cov = np.asarray(_apply_covariance(model, np.eye(model.n)))
    return 0.5 * (cov + cov.T)


def prior_log_density(model: SpdeModel, x: np.ndarray) -> float:
    """log N(x; 0, Q⁻¹) for latent weights x."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise ValidationError(f"weights must have shape ({model.n},)")
    quadratic = float(x @ (model.Q @ x))
    return 0.5 * (log_det_Q(model) - model.n * np.log(2.0 * np.pi) - quadratic)
