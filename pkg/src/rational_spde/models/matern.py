"""Provide the Matérn parameterization and its conversions.

A Matérn field with range parameter kappa, smoothness nu and variance phi2 in
dimension d solves (kappa^2 - Delta)^beta (tau u) = W with 2 beta = nu + d/2
and phi2 = Gamma(nu) / (tau^2 Gamma(2 beta) (4 pi)^(d/2) kappa^(2 nu)).

Examples:

    >>> from rational_spde.models.matern import MaternParams, param_convert

    >>> MaternParams(kappa=1.0, phi2=1.0, nu=0.5).beta
    0.75
    >>> beta, tau = param_convert(MaternParams(kappa=8**0.5, phi2=1.0, nu=1.0))
    >>> beta
    1.0
    >>> round(MaternParams.from_beta_tau(8**0.5, beta, tau).phi2, 12)
    1.0
    >>> round(MaternParams.from_range(1.0, nu=0.5).kappa, 12)
    2.0

The module contains the following classes:
- `MaternParams`: The parameters (kappa, phi2, nu, sigma2, d).

The module contains the following functions:
- `param_convert`: (beta, tau) from Matérn parameters.
- `practical_range`: sqrt(8 nu)/kappa.
- `validate_params`: Checks that the parameters are admissible.
"""

import math
from dataclasses import dataclass

from scipy.special import gammaln

from rational_spde.errors import ValidationError


@dataclass(frozen=True)
class MaternParams:
    """Matérn covariance parameters plus the nugget.

    Attributes:
        kappa: float
            Range parameter, 1/length.
        phi2: float
            Marginal variance.
        nu: float
            Smoothness.
        sigma2: float
            Measurement noise variance. Defaults to 0.
        d: int
            Spatial dimension. Defaults to 2.

    Methods:
        beta(self) -> float:
            nu/2 + d/4.
        tau(self) -> float:
            Amplitude implied by the variance identity.
        practical_range(self) -> float:
            sqrt(8 nu)/kappa.
        from_beta_tau(cls, kappa, beta, tau, sigma2, d) -> MaternParams:
            Inverse of `param_convert`.
        from_range(cls, practical_range, nu, phi2, sigma2, d) -> MaternParams:
            Parameters with a given practical range.
    """

    kappa: float
    phi2: float
    nu: float
    sigma2: float = 0.0
    d: int = 2

    def __post_init__(self) -> None:
        validate_params(self)

    @property
    def beta(self) -> float:
        """nu/2 + d/4."""
        return self.nu / 2.0 + self.d / 4.0

    @property
    def tau(self) -> float:
        """tau from phi2 = Gamma(nu)/(tau^2 Gamma(2 beta) (4 pi)^(d/2) kappa^(2 nu))."""
        log_tau2 = (
            gammaln(self.nu)
            - gammaln(2.0 * self.beta)
            - 0.5 * self.d * math.log(4.0 * math.pi)
            - 2.0 * self.nu * math.log(self.kappa)
            - math.log(self.phi2)
        )
        return math.exp(0.5 * log_tau2)

    @property
    def practical_range(self) -> float:
        """Distance sqrt(8 nu)/kappa where the correlation is about 0.13."""
        return math.sqrt(8.0 * self.nu) / self.kappa

    @classmethod
    def from_beta_tau(
        cls, kappa: float, beta: float, tau: float, sigma2: float = 0.0, d: int = 2
    ) -> "MaternParams":
        """Parameters with exponent beta and amplitude tau."""
        nu = 2.0 * beta - d / 2.0
        if not nu > 0 or not tau > 0:
            raise ValidationError(f"need beta > d/4 and tau > 0, got {beta}, {tau}")
        log_phi2 = (
            gammaln(nu)
            - gammaln(2.0 * beta)
            - 0.5 * d * math.log(4.0 * math.pi)
            - 2.0 * nu * math.log(kappa)
            - 2.0 * math.log(tau)
        )
        return cls(kappa=kappa, phi2=math.exp(log_phi2), nu=nu, sigma2=sigma2, d=d)

    @classmethod
    def from_range(
        cls,
        practical_range: float,
        nu: float,
        phi2: float = 1.0,
        sigma2: float = 0.0,
        d: int = 2,
    ) -> "MaternParams":
        """Parameters with kappa = sqrt(8 nu)/practical_range."""
        if not practical_range > 0:
            raise ValidationError(f"range must be positive, got {practical_range}")
        if not nu > 0:
            raise ValidationError(f"nu must be positive, got {nu}")
        kappa = math.sqrt(8.0 * nu) / practical_range
        return cls(kappa=kappa, phi2=phi2, nu=nu, sigma2=sigma2, d=d)


def param_convert(params: MaternParams) -> tuple[float, float]:
    """Returns (beta, tau) for Matérn parameters."""
    return params.beta, params.tau


def practical_range(params: MaternParams) -> float:
    """sqrt(8 nu)/kappa."""
    return params.practical_range


def validate_params(params: MaternParams) -> None:
    """Checks positivity of kappa, phi2 and nu, and sigma2 >= 0.

    Args:
        params (MaternParams): Represents the parameters to be validated.

    Raises:
        ValidationError: On an inadmissible value.
    """
    for name in ("kappa", "phi2", "nu"):
        value = getattr(params, name)
        if not (value > 0 and math.isfinite(value)):
            raise ValidationError(f"{name} must be positive and finite, got {value}")
    if not (params.sigma2 >= 0 and math.isfinite(params.sigma2)):
        raise ValidationError(f"sigma2 must be nonnegative, got {params.sigma2}")
    if params.d not in (1, 2, 3):
        raise ValidationError(f"dimension must be 1, 2 or 3, got {params.d}")
