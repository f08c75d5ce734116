"""Provide reference covariances and the error metrics comparing them.

Examples:

    >>> import math
    >>> from rational_spde.models.matern import MaternParams
    >>> from rational_spde.oracle.covariance import cov_errors, matern_cov

    >>> params = MaternParams(kappa=1.0, phi2=1.0, nu=0.5)
    >>> float(matern_cov(0.0, params))
    1.0
    >>> abs(float(matern_cov(1.0, params)) - math.exp(-1.0)) < 1e-14
    True

    >>> exact = lambda h: matern_cov(h, params)
    >>> l2, linf = cov_errors(lambda h: exact(h) + 0.01, exact)
    >>> round(linf, 12)
    0.01

The module contains the following functions:
- `matern_cov`: The Matérn covariance function.
- `cov_errors`: Normalized L2 and sup errors between covariance functions.
- `fractional_dense_oracle`: The exact covariance of the discretized
    fractional field, from a dense eigendecomposition.
- `generalized_eigen`: Dense eigenpairs of L with respect to the lumped mass.
- `neumann_matern_cov`: The Matérn covariance with Neumann conditions on a
    rectangle, by the method of images.
- `relative_frobenius`: Relative Frobenius distance between matrices.
"""

import math
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.integrate import trapezoid
from scipy.special import gammaln

from rational_spde.errors import ValidationError
from rational_spde.models.fem import FemOperators
from rational_spde.models.matern import MaternParams
from rational_spde.models.mesh import UNIT_SQUARE, Rect
from rational_spde.oracle.bessel import bessel_k

DENSE_ORACLE_CAP: int = 500
ERROR_GRID: int = 2000
IMAGE_RANGES: float = 6.0

CovarianceFunction = Callable[[np.ndarray], np.ndarray]


def matern_cov(h, params: MaternParams) -> np.ndarray:
    """phi2 2^(1-nu)/Gamma(nu) (kappa h)^nu K_nu(kappa h), equal to phi2 at 0.

    Args:
        h: Distances, nonnegative.
        params (MaternParams): The parameters.

    Returns:
        np.ndarray: Covariances, same shape as h.
    """
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValidationError("distances must be nonnegative")
    out = np.full(h.shape, params.phi2)
    positive = h > 0
    if np.any(positive):
        x = params.kappa * h[positive]
        log_scale = (1.0 - params.nu) * np.log(2.0) - gammaln(params.nu)
        out[positive] = (
            params.phi2 * np.exp(log_scale + params.nu * np.log(x)) * bessel_k(params.nu, x)
        )
    return out


def cov_errors(
    approx: CovarianceFunction,
    exact: CovarianceFunction,
    upper: float = 2.0,
    n_points: int = ERROR_GRID,
) -> tuple[float, float]:
    """Normalized L2 error and sup error on [0, upper].

    The L2 ratio (int (C - C_a)^2 / int C^2)^(1/2) uses the composite
    trapezoid rule on `n_points` equispaced points; the sup error is the
    maximum over the same grid.

    Returns:
        tuple[float, float]: (L2 ratio, sup error).
    """
    h = np.linspace(0.0, upper, n_points)
    reference = np.asarray(exact(h), dtype=float)
    difference = np.asarray(approx(h), dtype=float) - reference
    l2 = np.sqrt(trapezoid(difference**2, h) / trapezoid(reference**2, h))
    return float(l2), float(np.abs(difference).max())


def generalized_eigen(ops: FemOperators) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs L v = lambda C̃ v with VᵀC̃V = I, eigenvalues ascending."""
    if ops.n > DENSE_ORACLE_CAP:
        raise ValidationError(f"dense oracle limited to {DENSE_ORACLE_CAP} nodes")
    return scipy.linalg.eigh(ops.L.toarray(), np.diag(ops.C_lumped))


def fractional_dense_oracle(ops: FemOperators, beta: float, tau: float) -> np.ndarray:
    """V diag(tau_tilde^-2 lambda^(-2 beta)) Vᵀ with C̃-orthonormal V.

    Args:
        ops (FemOperators): Operators, at most 500 degrees of freedom.
        beta (float): Exponent.
        tau (float): Amplitude of the unnormalized equation.

    Raises:
        ValidationError: Above the size cap.

    Returns:
        np.ndarray: The dense covariance.
    """
    eigenvalues, V = generalized_eigen(ops)
    tau_tilde = tau * ops.amplitude_factor(beta)
    weights = eigenvalues ** (-2.0 * beta) / tau_tilde**2
    cov = (V * weights) @ V.T
    return 0.5 * (cov + cov.T)


def neumann_matern_cov(
    points, params: MaternParams, rect: Rect = UNIT_SQUARE, images: int | None = None
) -> np.ndarray:
    """Covariance matrix of the Matérn field with Neumann conditions on `rect`.

    Even reflection across the edges turns the Neumann problem into a
    periodic one on a rectangle with twice the side lengths. The covariance
    is therefore the whole-plane Matérn covariance summed over the four
    mirror images of the second point in every period cell within `images`
    cells of the origin.

    Args:
        points: Points inside `rect`, shape (P, 2).
        params (MaternParams): Parameters of the whole-plane field.
        rect (Rect): The domain. Defaults to the unit square.
        images (int | None): Period cells on each side; by default enough
            to push the dropped images IMAGE_RANGES practical ranges away.

    Raises:
        ValidationError: When a point lies outside `rect`.

    Returns:
        np.ndarray: The covariances, shape (P, P).
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    width = np.array([rect.x1 - rect.x0, rect.y1 - rect.y0])
    local = points - np.array([rect.x0, rect.y0])
    if np.any(local < -1e-12) or np.any(local > width + 1e-12):
        raise ValidationError("points must lie inside the rectangle")
    if images is None:
        reach = IMAGE_RANGES * params.practical_range / (2.0 * width.min())
        images = max(1, math.ceil(reach))

    shifts = np.arange(-images, images + 1)
    cov = np.zeros((len(points), len(points)))
    for signs in ((1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)):
        mirrored = local * np.array(signs)
        for a in shifts:
            for b in shifts:
                image = mirrored + 2.0 * width * np.array([a, b])
                distance = np.linalg.norm(local[:, None, :] - image[None, :, :], axis=-1)
                cov += matern_cov(distance, params)
    return 0.5 * (cov + cov.T)


def relative_frobenius(approx: np.ndarray, exact: np.ndarray) -> float:
    """|approx - exact|_F / |exact|_F."""
    return float(np.linalg.norm(approx - exact) / np.linalg.norm(exact))
