"""Provide the rational approximation of the fractional power x^beta.

For beta > 0 write m_beta = max(1, floor(beta)) and beta_hat = beta - m_beta.
On [delta, 1] the function x^beta_hat is approximated by q1(x)/q2(x) with
deg q1 = m and deg q2 = m + 1 (Clenshaw-Lord Chebyshev-Pade). Substituting
x = 1/lambda turns x^beta = x^beta_hat x^m_beta into a rational function of
lambda whose numerator and denominator factor over the real roots of q1 and
q2, which is what the operator matrices are built from.

Examples:

    >>> from rational_spde.models.rational import (
    ...     build_fractional_rational, default_delta, poly_roots
    ... )

    >>> default_delta(3)
    0.0001
    >>> poly_roots([2.0, -3.0, 1.0])
    array([1., 2.])

    >>> ra = build_fractional_rational(0.75, 1)
    >>> ra.m_beta, ra.beta_hat
    (1, -0.25)
    >>> [f"{value:.2e}" for value in (ra.b[0], ra.c[0], ra.b[1], ra.c[1], ra.b[2])]
    ['1.69e-02', '7.69e-02', '8.06e-01', '1.00e+00', '2.57e-01']

    >>> exact = build_fractional_rational(1.0, 2)
    >>> exact.sup_err, len(exact.r1), len(exact.r2)
    (0.0, 0, 0)

The module contains the following classes:
- `PadeCoefficients`: The monomial coefficients of a Chebyshev-Pade fit.
- `RationalApprox`: A complete approximation with roots and error.

The module contains the following functions:
- `default_delta`: The default left end of the fitting interval.
- `chebyshev_coefficients`: Chebyshev coefficients of a function on [delta, 1].
- `clenshaw_lord`: The Chebyshev-Pade fit of x^beta_hat.
- `poly_roots`: Real roots of a polynomial.
- `build_fractional_rational`: The approximation for a given beta and m.
- `cached_rational`: Memoized `build_fractional_rational`.
- `evaluate`, `evaluate_roots`: r_hat(x) in monomial and product form.
- `operator_symbol`: The scalar function approximating lambda^(-beta).
- `suggest_degree`: The degree matching a finite element error level.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from numpy.polynomial import polynomial as P
from scipy import linalg
from scipy.fft import dct

from rational_spde.errors import (
    ComplexRootError,
    DegenerateApproximationError,
    ValidationError,
)

logger = logging.getLogger(__name__)

DEFAULT_CHEB_DEGREE: int = 256
MAX_CHEB_DEGREE: int = 2**17
CHEB_TAIL_TOL: float = 1e-15
ROOT_IMAG_TOL: float = 1e-8
SUP_ERR_GRID: int = 10_000
MAX_DEGREE: int = 20
HANKEL_RCOND: float = 1e-14


@dataclass(frozen=True, eq=False)
class PadeCoefficients:
    """Monomial coefficients of q1/q2 approximating x^beta_hat on [delta, 1].

    Attributes:
        beta_hat: float
            The exponent.
        m: int
            Degree of q1.
        delta: float
            Left end of the interval.
        c: np.ndarray
            Coefficients c_0..c_m of q1, ascending, with c_m = 1.
        b: np.ndarray
            Coefficients b_0..b_(m+1) of q2, ascending.
        sup_err: float
            Maximum of |x^beta_hat - q1/q2| on a Chebyshev grid of [delta, 1].
    """

    beta_hat: float
    m: int
    delta: float
    c: np.ndarray
    b: np.ndarray
    sup_err: float


@dataclass(frozen=True, eq=False)
class RationalApprox:
    """The rational approximation of x^beta used by the operator model.

    Attributes:
        beta: float
            Target exponent.
        m: int
            Degree of q1.
        m_beta: int
            max(1, floor(beta)).
        beta_hat: float
            beta - m_beta, in (-1, 1).
        delta: float
            Left end of the fitting interval.
        c: np.ndarray
            Coefficients of q1, ascending, normalized c_m = 1.
        b: np.ndarray
            Coefficients of q2, ascending.
        r1: np.ndarray
            Roots of q1.
        r2: np.ndarray
            Roots of q2.
        sup_err: float
            Grid estimate of max |x^beta_hat - q1/q2| on [delta, 1].

    Methods:
        c_lead(self) -> float:
            Leading coefficient of q1.
        b_lead(self) -> float:
            Leading coefficient of q2.
        extra_powers(self) -> int:
            Number of plain operator factors appended to the denominator.
    """

    beta: float
    m: int
    m_beta: int
    beta_hat: float
    delta: float
    c: np.ndarray
    b: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    sup_err: float

    def __post_init__(self) -> None:
        validate_roots(self)

    @property
    def c_lead(self) -> float:
        """Leading coefficient of q1."""
        return float(self.c[-1])

    @property
    def b_lead(self) -> float:
        """Leading coefficient of q2."""
        return float(self.b[-1])

    @property
    def is_exact(self) -> bool:
        """True for integer beta, where no approximation is made."""
        return len(self.r1) == 0 and len(self.r2) == 0

    @property
    def extra_powers(self) -> int:
        """Number of factors of the operator itself in the denominator."""
        return self.m_beta - (len(self.r2) - len(self.r1))


def default_delta(m: int) -> float:
    """Returns 10^(-(5 + m)/2), the default left end of the fitting interval.

    Args:
        m (int): Degree, at least 1.

    Returns:
        float: The interval end.
    """
    if m < 1:
        raise ValidationError(f"degree must be at least 1, got {m}")
    return float(10.0 ** (-(5 + m) / 2))


def chebyshev_points(n: int, delta: float) -> np.ndarray:
    """First-kind Chebyshev points mapped to [delta, 1], decreasing."""
    t = np.cos(np.pi * (np.arange(n) + 0.5) / n)
    return 0.5 * (1.0 + delta) + 0.5 * (1.0 - delta) * t


def chebyshev_coefficients(
    beta_hat: float, delta: float, degree: int = DEFAULT_CHEB_DEGREE
) -> np.ndarray:
    """Chebyshev coefficients of x^beta_hat on [delta, 1].

    Interpolates at first-kind Chebyshev points with a type-II DCT and
    doubles the number of points until the trailing eighth of the
    coefficients falls below 1e-15 of the largest one.

    Args:
        beta_hat (float): The exponent.
        delta (float): Left end of the interval.
        degree (int): Initial number of points. Defaults to 256.

    Returns:
        np.ndarray: Coefficients a_k with f = sum_k a_k T_k.
    """
    n = degree
    while True:
        values = chebyshev_points(n, delta) ** beta_hat
        a = dct(values, type=2) / n
        a[0] /= 2.0
        tail = np.abs(a[-max(1, n // 8) :]).max()
        if tail <= CHEB_TAIL_TOL * np.abs(a).max() or n >= MAX_CHEB_DEGREE:
            if n >= MAX_CHEB_DEGREE:
                logger.warning(
                    "Chebyshev series not resolved at %d points (tail %.2e)", n, tail
                )
            logger.debug("Chebyshev series of x^%.6g on [%.3g, 1]: %d terms", beta_hat, delta, n)
            return a
        n *= 2


def _pade_chebyshev(a: np.ndarray, m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Clenshaw-Lord numerator and denominator in the Chebyshev basis."""
    l = max(m, n)
    c = np.zeros(max(len(a), m + n + 1))
    c[: len(a)] = a
    c[0] *= 2.0

    rows = m + np.arange(1, n + 1)[:, None] - np.arange(0, n + 1)[None, :]
    system = c[np.abs(rows)]
    hankel, rhs = system[:, 1:], -system[:, 0]
    if np.linalg.cond(hankel) * HANKEL_RCOND > 1.0:
        raise DegenerateApproximationError(
            "Chebyshev-Pade denominator system is singular; "
            "use a smaller degree or a larger delta"
        )
    beta = np.concatenate([[1.0], linalg.solve(hankel, rhs)])

    c[0] /= 2.0
    alpha = np.convolve(c[: l + 1], beta)[: l + 1]
    padded = np.zeros(l + 1)
    padded[: n + 1] = beta
    D = np.outer(alpha, padded)
    s = np.array([beta[: n + 1 - k] @ beta[k:] for k in range(n + 1)])

    p = np.empty(m + 1)
    p[0] = np.trace(D)
    for k in range(1, m + 1):
        p[k] = np.trace(D, offset=k) + np.trace(D, offset=-k)
    q = 2.0 * s / s[0]
    q[0] = 1.0
    return p / s[0], q


def _monomial(coef: np.ndarray, delta: float) -> np.ndarray:
    return Chebyshev(coef, domain=[delta, 1.0]).convert(kind=Polynomial).coef


def sup_error(beta_hat: float, c: np.ndarray, b: np.ndarray, delta: float) -> float:
    """max |x^beta_hat - q1(x)/q2(x)| on a Chebyshev grid of [delta, 1]."""
    x = np.concatenate([[delta, 1.0], chebyshev_points(SUP_ERR_GRID, delta)])
    return float(np.abs(x**beta_hat - P.polyval(x, c) / P.polyval(x, b)).max())


def clenshaw_lord(
    beta_hat: float, m: int, delta: float, degree: int = DEFAULT_CHEB_DEGREE
) -> PadeCoefficients:
    """Computes the [m/m+1] Chebyshev-Pade approximation of x^beta_hat.

    Args:
        beta_hat (float): Exponent in (-1, 1).
        m (int): Numerator degree, at least 1.
        delta (float): Left end of the interval, in (0, 1).
        degree (int): Initial Chebyshev interpolation degree.

    Raises:
        ValidationError: On arguments out of range.
        DegenerateApproximationError: When the denominator system is singular.

    Returns:
        PadeCoefficients: Monomial coefficients normalized so that c_m = 1.
    """
    if not -1.0 < beta_hat < 1.0:
        raise ValidationError(f"exponent must lie in (-1, 1), got {beta_hat}")
    if m < 1:
        raise ValidationError(f"degree must be at least 1, got {m}")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")

    a = chebyshev_coefficients(beta_hat, delta, degree)
    p, q = _pade_chebyshev(a, m, m + 1)
    c, b = _monomial(p, delta), _monomial(q, delta)
    if c[-1] == 0.0 or b[-1] == 0.0:
        raise DegenerateApproximationError("Chebyshev-Pade fit lost a degree")
    c, b = c / c[-1], b / c[-1]
    return PadeCoefficients(
        beta_hat=beta_hat,
        m=m,
        delta=delta,
        c=c,
        b=b,
        sup_err=sup_error(beta_hat, c, b, delta),
    )


def poly_roots(coeffs) -> np.ndarray:
    """Real roots of a polynomial from its companion matrix.

    Args:
        coeffs: Monomial coefficients, ascending.

    Raises:
        ValidationError: When the leading coefficient is zero.
        ComplexRootError: When a root has an imaginary part above
            1e-8 (1 + |real part|).

    Returns:
        np.ndarray: The roots, sorted ascending.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if len(coeffs) == 0 or coeffs[-1] == 0.0:
        raise ValidationError("leading coefficient must be nonzero")
    roots = P.polyroots(coeffs)
    if np.iscomplexobj(roots):
        spurious = np.abs(roots.imag) > ROOT_IMAG_TOL * (1.0 + np.abs(roots.real))
        if np.any(spurious):
            raise ComplexRootError(f"polynomial has complex roots {roots[spurious]}")
        roots = roots.real
    return np.sort(roots)


def build_fractional_rational(
    beta: float, m: int, delta: float | None = None, d: int = 2
) -> RationalApprox:
    """Builds the rational approximation for the exponent beta.

    Args:
        beta (float): Exponent, above d/4.
        m (int): Degree of q1, at least 1.
        delta (float | None): Left end of the interval. Defaults to
            `default_delta(m)`.
        d (int): Spatial dimension. Defaults to 2.

    Raises:
        ValidationError: On arguments out of range.
        DegenerateApproximationError, ComplexRootError: When the fit fails.

    Returns:
        RationalApprox: Coefficients, roots and error estimate.
    """
    if not beta > d / 4:
        raise ValidationError(f"beta must exceed d/4 = {d / 4}, got {beta}")
    if m < 1:
        raise ValidationError(f"degree must be at least 1, got {m}")
    delta = default_delta(m) if delta is None else float(delta)
    m_beta = max(1, math.floor(beta))
    beta_hat = beta - m_beta

    if abs(beta_hat) < 1e-12:
        return RationalApprox(
            beta=beta, m=m, m_beta=m_beta, beta_hat=0.0, delta=delta,
            c=np.ones(1), b=np.ones(1), r1=np.empty(0), r2=np.empty(0), sup_err=0.0,
        )

    fit = clenshaw_lord(beta_hat, m, delta)
    ra = RationalApprox(
        beta=beta,
        m=m,
        m_beta=m_beta,
        beta_hat=beta_hat,
        delta=delta,
        c=fit.c,
        b=fit.b,
        r1=poly_roots(fit.c),
        r2=poly_roots(fit.b),
        sup_err=fit.sup_err,
    )
    logger.debug(
        "rational approximation beta=%.6g m=%d delta=%.3g sup_err=%.3e",
        beta, m, delta, ra.sup_err,
    )
    return ra


@lru_cache(maxsize=256)
def _cached(beta: float, m: int, delta: float | None) -> RationalApprox:
    return build_fractional_rational(beta, m, delta)


def cached_rational(beta: float, m: int, delta: float | None = None) -> RationalApprox:
    """`build_fractional_rational` memoized on (beta, m, delta) rounded to 1e-12."""
    key_delta = None if delta is None else round(float(delta), 12)
    return _cached(round(float(beta), 12), int(m), key_delta)


def validate_roots(ra: RationalApprox) -> None:
    """Checks root counts and that no root lies in [delta, 1].

    Args:
        ra (RationalApprox): Represents the approximation to be validated.

    Raises:
        DegenerateApproximationError: On a root inside the fitting interval.
        ValidationError: On inconsistent degrees.
    """
    if len(ra.r1) != len(ra.c) - 1 or len(ra.r2) != len(ra.b) - 1:
        raise ValidationError("root count does not match polynomial degree")
    for roots in (ra.r1, ra.r2):
        inside = roots[(roots >= ra.delta) & (roots <= 1.0)]
        if len(inside):
            raise DegenerateApproximationError(
                f"root {inside[0]:.6g} lies inside [{ra.delta:.3g}, 1]"
            )


def evaluate(ra: RationalApprox, x) -> np.ndarray:
    """r_hat(x) = q1(x)/q2(x) from the monomial coefficients."""
    x = np.asarray(x, dtype=float)
    return P.polyval(x, ra.c) / P.polyval(x, ra.b)


def evaluate_roots(ra: RationalApprox, x) -> np.ndarray:
    """r_hat(x) from the leading coefficients and the roots."""
    x = np.asarray(x, dtype=float)
    top = ra.c_lead * np.prod(x[..., None] - ra.r1, axis=-1)
    bottom = ra.b_lead * np.prod(x[..., None] - ra.r2, axis=-1)
    return top / bottom


def operator_symbol(ra: RationalApprox, lam) -> np.ndarray:
    """The scalar function r(lambda) ~ lambda^(-beta) realized by the model.

    r(lambda) = c_lead prod(1 - r1 lambda) / (lambda^e b_lead prod(1 - r2
    lambda)) with e = `ra.extra_powers`, which equals r_hat(1/lambda)
    lambda^(-m_beta).

    Args:
        ra (RationalApprox): The approximation.
        lam: Values lambda > 0.

    Returns:
        np.ndarray: r(lambda).
    """
    lam = np.asarray(lam, dtype=float)
    top = ra.c_lead * np.prod(1.0 - ra.r1 * lam[..., None], axis=-1)
    bottom = ra.b_lead * np.prod(1.0 - ra.r2 * lam[..., None], axis=-1)
    return top / (bottom * lam**ra.extra_powers)


def suggest_degree(h: float, beta: float) -> int:
    """Smallest degree whose rational error matches the finite element error.

    Picks the smallest m >= 1 with exp(-2 pi sqrt(|beta_hat| m)) <=
    h^(2 max(beta, 1)), which keeps the strong convergence rate of the
    finite element discretization.

        >>> [suggest_degree(2**0.5 / n, 0.75) for n in (56, 84, 114)]
        [6, 7, 8]

    Args:
        h (float): Mesh width, in (0, 1).
        beta (float): Exponent.

    Returns:
        int: The degree, capped at 20.
    """
    if not 0.0 < h < 1.0:
        raise ValidationError(f"mesh width must lie in (0, 1), got {h}")
    beta_hat = abs(beta - max(1, math.floor(beta)))
    if beta_hat < 1e-12:
        return 1
    target = h ** (2.0 * max(beta, 1.0))
    for m in range(1, MAX_DEGREE + 1):
        if math.exp(-2.0 * math.pi * math.sqrt(beta_hat * m)) <= target:
            return m
    return MAX_DEGREE
