"""Provide maximum-likelihood estimation of the Matérn parameters.

The optimizer works on theta = (log kappa, log phi2, log sigma2, log nu) with
Nelder-Mead. Every evaluation derives beta = nu/2 + d/4, fetches the rational
approximation from a cache and rebuilds the model on the fixed mesh.

The module contains the following classes:
- `FitOptions`: Settings of the optimizer.
- `FitResult`: The estimate and the likelihood achieved.

The module contains the following functions:
- `mle_fit`: Maximizes the likelihood.
- `evaluate_log_likelihood`: The likelihood at given parameters.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from rational_spde.errors import (
    NonFiniteLikelihoodError,
    NumericalError,
    ValidationError,
)
from rational_spde.inference.posterior import log_likelihood
from rational_spde.models.fem import CoefficientField, FemOperators, assemble, matern_operators
from rational_spde.models.flags import BoundaryCondition
from rational_spde.models.matern import MaternParams
from rational_spde.models.mesh import TriMesh
from rational_spde.models.observations import ObservationSet
from rational_spde.models.rational import cached_rational
from rational_spde.models.spde import build_model

logger = logging.getLogger(__name__)

NUGGET_FLOOR: float = 1e-12
PARAMETERS: tuple[str, ...] = ("kappa", "phi2", "sigma2", "nu")


@dataclass(frozen=True)
class FitOptions:
    """Settings of `mle_fit`.

    Attributes:
        bc: BoundaryCondition
            Boundary condition. Defaults to Neumann.
        xatol: float
            Simplex size at convergence, in theta. Defaults to 1e-6.
        maxiter: int
            Iteration cap. Defaults to 400.
        delta: float | None
            Fitting interval end of the rational approximation.
        fixed: frozenset[str]
            Parameters held at their initial value.
    """

    bc: BoundaryCondition = BoundaryCondition.NEUMANN
    xatol: float = 1e-6
    maxiter: int = 400
    delta: float | None = None
    fixed: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        unknown = set(self.fixed) - set(PARAMETERS)
        if unknown:
            raise ValidationError(f"unknown parameters {sorted(unknown)}")
        if self.maxiter < 1 or not self.xatol > 0:
            raise ValidationError("maxiter and xatol must be positive")


@dataclass(frozen=True)
class FitResult:
    """Outcome of `mle_fit`.

    Attributes:
        params: MaternParams
            The estimate.
        loglik: float
            Log-likelihood at the estimate.
        init_loglik: float
            Log-likelihood at the initial point.
        n_evaluations: int
            Number of likelihood evaluations.
        converged: bool
            Whether the simplex shrank below the tolerance.
    """

    params: MaternParams
    loglik: float
    init_loglik: float
    n_evaluations: int
    converged: bool


def _to_theta(params: MaternParams) -> np.ndarray:
    return np.log([params.kappa, params.phi2, max(params.sigma2, NUGGET_FLOOR), params.nu])


def _from_theta(theta: np.ndarray, d: int) -> MaternParams:
    kappa, phi2, sigma2, nu = np.exp(theta)
    return MaternParams(
        kappa=float(kappa),
        phi2=float(phi2),
        nu=float(nu),
        sigma2=max(float(sigma2), NUGGET_FLOOR),
        d=d,
    )


def evaluate_log_likelihood(
    params: MaternParams,
    obs: ObservationSet,
    base: FemOperators,
    m: int,
    delta: float | None = None,
) -> float:
    """Log-likelihood of the observations under the Matérn model.

    Args:
        params (MaternParams): Parameters, sigma2 > 0.
        obs (ObservationSet): Observations.
        base (FemOperators): Unscaled operators with H = I supplying C and G.
        m (int): Rational degree.
        delta (float | None): Fitting interval end.

    Returns:
        float: The log-likelihood.
    """
    ops = matern_operators(base, params.kappa)
    ra = cached_rational(params.beta, m, delta)
    model = build_model(ops, params.beta, m, tau=params.tau, ra=ra)
    return log_likelihood(model, obs, max(params.sigma2, NUGGET_FLOOR))


def mle_fit(
    obs: ObservationSet,
    mesh: TriMesh,
    m: int,
    init: MaternParams,
    opts: FitOptions | None = None,
) -> FitResult:
    """Maximizes the likelihood over (kappa, phi2, sigma2, nu).

    Args:
        obs (ObservationSet): Observations on `mesh`.
        mesh (TriMesh): The mesh, extension chosen by the caller.
        m (int): Rational degree.
        init (MaternParams): Starting point.
        opts (FitOptions | None): Settings.

    Raises:
        NonFiniteLikelihoodError: When the likelihood at `init` is not finite.
        NumericalError: When every simplex point fails.

    Returns:
        FitResult: The best point found.
    """
    opts = opts or FitOptions()
    base = assemble(mesh, CoefficientField(kappa2=0.0), opts.bc)
    theta0 = _to_theta(init)
    free = [i for i, name in enumerate(PARAMETERS) if name not in opts.fixed]
    evaluations = 0

    def full(theta_free: np.ndarray) -> np.ndarray:
        theta = theta0.copy()
        theta[free] = theta_free
        return theta

    def objective(theta_free: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        try:
            params = _from_theta(full(theta_free), init.d)
            value = evaluate_log_likelihood(params, obs, base, m, opts.delta)
        except (NumericalError, ValidationError) as error:
            logger.debug("evaluation at %s failed: %s", np.exp(full(theta_free)), error)
            return math.inf
        logger.debug("theta=%s loglik=%.6f", np.round(full(theta_free), 6), value)
        return -value

    init_value = -objective(theta0[free])
    if not math.isfinite(init_value):
        raise NonFiniteLikelihoodError("log-likelihood at the initial point is not finite")
    if not free:
        return FitResult(init, init_value, init_value, evaluations, True)

    result = minimize(
        objective,
        theta0[free],
        method="Nelder-Mead",
        options={"xatol": opts.xatol, "fatol": math.inf, "maxiter": opts.maxiter},
    )
    if not math.isfinite(result.fun):
        raise NumericalError("every simplex point failed to evaluate")
    best = -float(result.fun)
    if best < init_value:
        logger.warning("optimizer ended below the initial likelihood; keeping init")
        return FitResult(init, init_value, init_value, evaluations, False)
    if not result.success:
        logger.warning("Nelder-Mead stopped: %s", result.message)
    params = _from_theta(full(result.x), init.d)
    logger.info(
        "fit kappa=%.4g phi2=%.4g sigma2=%.4g nu=%.4g loglik=%.4f (%d evaluations)",
        params.kappa, params.phi2, params.sigma2, params.nu, best, evaluations,
    )
    return FitResult(params, best, init_value, evaluations, bool(result.success))
