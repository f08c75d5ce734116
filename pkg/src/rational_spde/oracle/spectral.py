"""Provide covariances on the plane of spectrally defined fields.

A field u with (kappa^2 - Delta)^beta (tau u) = W has the isotropic
spectral density (2 pi)^-2 tau^-2 kappa^(-4 beta) (1 + |w|^2/kappa^2)^(-2 beta).
Replacing lambda^(-beta) by any approximation r(lambda) and transforming
back gives

    C(h) = kappa^(2 - 4 beta)/(2 pi tau^2) int_0^inf s J_0(kappa h s) r(1 + s^2)^2 ds,

which is evaluated by a Hankel transform split at the zeros of J_0, with
the partial sums accelerated by the Wynn epsilon algorithm.

Examples:

    >>> from rational_spde.models.matern import MaternParams
    >>> from rational_spde.oracle.covariance import matern_cov
    >>> from rational_spde.oracle.spectral import matern_spectral_model

    >>> params = MaternParams(kappa=2.0, phi2=1.0, nu=1.0)
    >>> model = matern_spectral_model(params)
    >>> abs(float(model.covariance(0.3)) - float(matern_cov(0.3, params))) < 1e-8
    True

The module contains the following classes:
- `SpectralModel`: A covariance defined by the symbol r(lambda).

The module contains the following functions:
- `hankel_transform`: int_0^inf g(s) J_0(a s) ds.
- `wynn_epsilon`: Limit estimate of a sequence of partial sums.
- `matern_spectral_model`: The exact Matérn symbol.
- `rational_spectral_model`: The symbol of a rational approximation.
- `quadrature_spectral_model`: The symbol of the quadrature baseline.
- `rational_spectral_cov`: Covariance of the rational approximation.
- `quadrature_spectral_cov`: Covariance of the quadrature baseline.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import j0, jn_zeros

from rational_spde.errors import NumericalError, ValidationError
from rational_spde.models.matern import MaternParams
from rational_spde.models.quadrature import quadrature_rule, step_for_nodes
from rational_spde.models.rational import RationalApprox

logger = logging.getLogger(__name__)

Symbol = Callable[[float], float]

HANKEL_TOL: float = 1e-10
MAX_PANELS: int = 400
MIN_PANELS: int = 6
WYNN_WINDOW: int = 24
QUADRATURE_NODES: int = 12


@lru_cache(maxsize=1)
def _j0_zeros(count: int) -> np.ndarray:
    return jn_zeros(0, count)


def wynn_epsilon(partial_sums) -> float:
    """Estimates the limit of a sequence with the Wynn epsilon algorithm.

    Args:
        partial_sums: The sequence, at least one value.

    Returns:
        float: The last even-column entry of the epsilon table.
    """
    previous = [0.0] * (len(partial_sums) + 1)
    current = [float(value) for value in partial_sums]
    best = current[-1]
    column = 0
    while len(current) > 1:
        following = []
        for i in range(len(current) - 1):
            difference = current[i + 1] - current[i]
            if difference == 0.0:
                return current[i + 1] if column % 2 == 0 else best
            following.append(previous[i + 1] + 1.0 / difference)
        previous, current = current, following
        column += 1
        if column % 2 == 0:
            best = current[-1]
    return best


def hankel_transform(
    g: Callable[[float], float], a: float, tol: float = HANKEL_TOL
) -> float:
    """int_0^inf g(s) J_0(a s) ds for a slowly decaying g.

    Args:
        g (Callable[[float], float]): Integrand without the Bessel factor.
        a (float): Frequency, nonnegative.
        tol (float): Absolute tolerance. Defaults to 1e-10.

    Raises:
        NumericalError: When a panel integral is not finite.

    Returns:
        float: The transform.
    """
    if a == 0.0:
        value, _ = quad(g, 0.0, math.inf, epsabs=tol, epsrel=1e-12, limit=400)
        return float(value)

    edges = np.concatenate([[0.0], _j0_zeros(MAX_PANELS) / a])

    def integrand(s: float) -> float:
        return g(s) * j0(a * s)

    partial = 0.0
    sums: list[float] = []
    estimate = previous = math.nan
    for low, high in zip(edges[:-1], edges[1:]):
        breaks = [point for point in (1.0, 10.0, 100.0) if low < point < high]
        piece, _ = quad(
            integrand, low, high, epsabs=0.01 * tol, epsrel=1e-12, limit=200,
            points=breaks or None,
        )
        if not math.isfinite(piece):
            raise NumericalError(f"Hankel panel [{low:.4g}, {high:.4g}] diverged")
        partial += piece
        sums.append(partial)
        if len(sums) >= MIN_PANELS:
            estimate = wynn_epsilon(sums[-WYNN_WINDOW:])
            if abs(estimate - previous) < tol:
                return estimate
            previous = estimate
    logger.warning("Hankel transform at a=%.4g not converged after %d panels", a, MAX_PANELS)
    return estimate


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """A stationary field on the plane defined by the symbol r ~ lambda^(-beta).

    Attributes:
        params: MaternParams
            Target parameters, d = 2; tau normalizes the variance.
        symbol: Callable[[float], float]
            r(lambda) for lambda >= 1.
        label: str
            Name used in reports.

    Methods:
        prefactor(self) -> float:
            kappa^(2 - 4 beta)/(2 pi tau^2).
        spectral_density(self, w) -> np.ndarray:
            S(w) of the field.
        covariance(self, h) -> np.ndarray:
            C(h) by Hankel transform.
    """

    params: MaternParams
    symbol: Symbol
    label: str = "spectral"

    def __post_init__(self) -> None:
        if self.params.d != 2:
            raise ValidationError("spectral covariances are implemented for d = 2")

    @property
    def prefactor(self) -> float:
        """kappa^(2 - 4 beta)/(2 pi tau^2)."""
        p = self.params
        return p.kappa ** (2.0 - 4.0 * p.beta) / (2.0 * math.pi * p.tau**2)

    def spectral_density(self, w) -> np.ndarray:
        """(2 pi)^-2 tau^-2 kappa^(-4 beta) r(1 + |w|^2/kappa^2)^2."""
        p = self.params
        w = np.asarray(w, dtype=float)
        lam = 1.0 + (w / p.kappa) ** 2
        r = np.vectorize(self.symbol, otypes=[float])(lam)
        return r**2 / ((2.0 * math.pi) ** 2 * p.tau**2 * p.kappa ** (4.0 * p.beta))

    def covariance(self, h, tol: float = HANKEL_TOL) -> np.ndarray:
        """C(h) for distances h >= 0."""
        h = np.asarray(h, dtype=float)
        if np.any(h < 0):
            raise ValidationError("distances must be nonnegative")
        symbol = self.symbol

        def g(s: float) -> float:
            r = symbol(1.0 + s * s)
            return s * r * r

        values = [
            hankel_transform(g, self.params.kappa * float(x), tol) for x in h.ravel()
        ]
        return self.prefactor * np.array(values).reshape(h.shape)


def matern_spectral_model(params: MaternParams) -> SpectralModel:
    """The exact symbol lambda^(-beta)."""
    beta = params.beta
    return SpectralModel(params, lambda lam: lam ** (-beta), "matern")


def rational_spectral_model(params: MaternParams, ra: RationalApprox) -> SpectralModel:
    """The symbol of `ra`, see `rational.operator_symbol`."""
    if abs(ra.beta - params.beta) > 1e-12:
        raise ValidationError(f"approximation is for beta={ra.beta}, not {params.beta}")
    c_lead, b_lead = ra.c_lead, ra.b_lead
    r1 = [float(r) for r in ra.r1]
    r2 = [float(r) for r in ra.r2]
    powers = ra.extra_powers

    def symbol(lam: float) -> float:
        top, bottom = c_lead, b_lead
        for root in r1:
            top *= 1.0 - root * lam
        for root in r2:
            bottom *= 1.0 - root * lam
        return top / (bottom * lam**powers)

    return SpectralModel(params, symbol, f"rational m={ra.m}")


def quadrature_spectral_model(
    params: MaternParams, n_nodes: int = QUADRATURE_NODES
) -> SpectralModel:
    """The symbol lambda^(-floor(beta)) sum_j w_j/(1 + c_j lambda) of the
    quadrature baseline with `n_nodes` nodes for the fractional part."""
    beta = params.beta
    whole = math.floor(beta)
    residual = beta - whole
    if residual < 1e-12:
        return SpectralModel(params, lambda lam: lam ** (-beta), f"quadrature K={n_nodes}")
    k = step_for_nodes(residual, n_nodes)
    shifts, weights = quadrature_rule(residual, k)
    pairs = list(zip(shifts.tolist(), weights.tolist()))

    def symbol(lam: float) -> float:
        return sum(w / (1.0 + c * lam) for c, w in pairs) * lam ** (-whole)

    return SpectralModel(params, symbol, f"quadrature K={n_nodes}")


def rational_spectral_cov(h, params: MaternParams, ra: RationalApprox) -> np.ndarray:
    """Covariance of the rational approximation on the plane."""
    return rational_spectral_model(params, ra).covariance(h)


def quadrature_spectral_cov(
    h, params: MaternParams, n_nodes: int = QUADRATURE_NODES
) -> np.ndarray:
    """Covariance of the quadrature baseline on the plane."""
    return quadrature_spectral_model(params, n_nodes).covariance(h)
