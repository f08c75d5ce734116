"""Provide posterior inference for the latent model y = A P_r x + noise.

With x ~ N(0, Q⁻¹) and noise variance sigma2,

    Q_xy = Q + sigma2⁻¹ P_rᵀ Aᵀ A P_r,   Q_xy mu = sigma2⁻¹ P_rᵀ Aᵀ y,

and the marginal log-likelihood of R replicates is

    R (log|P_l| - log|C̃|/2 - log|Q_xy|/2 - N log sigma - N log(2 pi)/2)
      - 1/2 sum_r (mu_rᵀ Q mu_r + sigma2⁻¹ |y_r - A P_r mu_r|^2).

The module contains the following classes:
- `PosteriorState`: Factorized posterior precision and means.

The module contains the following functions:
- `posterior`: Conditions the model on observations.
- `log_likelihood`: Marginal log-likelihood of the observations.
- `krige`: Predictive means and variances.
- `posterior_sample`: Draws fields from the posterior.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from rational_spde.errors import NonFiniteLikelihoodError, ValidationError
from rational_spde.linalg.sparse_core import CholFactor, as_csr, cholesky, symmetrize
from rational_spde.models.observations import ObservationSet
from rational_spde.models.spde import SpdeModel, log_det_P_l

logger = logging.getLogger(__name__)

KRIGE_BLOCK: int = 256


@dataclass(frozen=True, eq=False)
class PosteriorState:
    """The latent posterior shared by all replicates.

    Attributes:
        Q_xy: sparse.csr_matrix
            Posterior precision.
        factor: CholFactor
            Its Cholesky factor.
        mu: np.ndarray
            Posterior means, shape (R, n).
        sigma2: float
            Nugget used.
        AP: sparse.csr_matrix
            A P_r restricted to the degrees of freedom.
    """

    Q_xy: sparse.csr_matrix
    factor: CholFactor
    mu: np.ndarray
    sigma2: float
    AP: sparse.csr_matrix


def _nugget(obs: ObservationSet, sigma2: float | None) -> float:
    value = obs.sigma2 if sigma2 is None else sigma2
    if value is None or not value > 0:
        raise ValidationError(f"nugget must be positive, got {value}")
    return float(value)


def posterior(
    model: SpdeModel, obs: ObservationSet, sigma2: float | None = None
) -> PosteriorState:
    """Computes the posterior precision, its factor and the means.

    Args:
        model (SpdeModel): The prior model.
        obs (ObservationSet): The observations.
        sigma2 (float | None): Nugget; defaults to `obs.sigma2`.

    Raises:
        ValidationError: Without a positive nugget.
        NotPositiveDefiniteError: When Q_xy cannot be factored.

    Returns:
        PosteriorState: The posterior.
    """
    sigma2 = _nugget(obs, sigma2)
    AP = as_csr(model.ops.restrict(obs.A) @ model.P_r)
    Q_xy = symmetrize(model.Q + (AP.T @ AP) / sigma2)
    factor = cholesky(Q_xy)
    rhs = np.asarray(AP.T @ obs.y.T) / sigma2
    mu = np.asarray(factor.solve(rhs)).reshape(model.n, obs.n_replicates).T
    return PosteriorState(Q_xy=Q_xy, factor=factor, mu=mu, sigma2=sigma2, AP=AP)


def log_likelihood(
    model: SpdeModel, obs: ObservationSet, sigma2: float | None = None
) -> float:
    """Exact Gaussian log-density of the observations under the model.

    Args:
        model (SpdeModel): The prior model.
        obs (ObservationSet): The observations.
        sigma2 (float | None): Nugget; defaults to `obs.sigma2`.

    Raises:
        NonFiniteLikelihoodError: When the value is not finite.

    Returns:
        float: The log-likelihood summed over replicates.
    """
    post = posterior(model, obs, sigma2)
    n_obs, n_rep = obs.n_obs, obs.n_replicates
    shared = (
        log_det_P_l(model)
        - 0.5 * model.log_det_C_lumped
        - 0.5 * post.factor.logdet
        - 0.5 * n_obs * np.log(post.sigma2)
        - 0.5 * n_obs * np.log(2.0 * np.pi)
    )
    mu = post.mu.T
    prior_term = np.einsum("ir,ir->", mu, np.asarray(model.Q @ mu))
    residual = obs.y.T - np.asarray(post.AP @ mu)
    data_term = np.sum(residual**2) / post.sigma2
    value = float(n_rep * shared - 0.5 * (prior_term + data_term))
    if not np.isfinite(value):
        raise NonFiniteLikelihoodError(f"log-likelihood is {value}")
    logger.debug(
        "log-likelihood %.6f (beta=%.4g, sigma2=%.4g, R=%d, N=%d)",
        value, model.beta, post.sigma2, n_rep, n_obs,
    )
    return value


def krige(
    post: PosteriorState, model: SpdeModel, A_pred: sparse.spmatrix
) -> tuple[np.ndarray, np.ndarray]:
    """Predictive means and marginal variances at new locations.

    Args:
        post (PosteriorState): The posterior.
        model (SpdeModel): The prior model.
        A_pred (sparse.spmatrix): Basis at the prediction points.

    Returns:
        tuple[np.ndarray, np.ndarray]: Means of shape (R, N_pred) and
            variances of shape (N_pred,).
    """
    B = as_csr(model.ops.restrict(A_pred) @ model.P_r)
    means = np.asarray(B @ post.mu.T).T
    variances = np.empty(B.shape[0])
    for start in range(0, B.shape[0], KRIGE_BLOCK):
        block = B[start : start + KRIGE_BLOCK].toarray().T
        solved = np.asarray(post.factor.solve(block)).reshape(block.shape)
        variances[start : start + KRIGE_BLOCK] = np.sum(block * solved, axis=0)
    return means, variances


def posterior_sample(
    post: PosteriorState,
    model: SpdeModel,
    n_samples: int,
    seed: int | np.random.Generator,
    replicate: int = 0,
) -> np.ndarray:
    """Draws fields u = P_r x with x ~ N(mu, Q_xy⁻¹).

    Returns:
        np.ndarray: Samples of shape (n_samples, n).
    """
    if n_samples < 1:
        raise ValidationError(f"need at least one sample, got {n_samples}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((model.n, n_samples))
    x = post.mu[replicate][:, None] + post.factor.solve_Lt(z)
    return np.asarray(model.P_r @ x).T
