"""Provide the modified Bessel function of the second kind.

Examples:

    >>> import math
    >>> from rational_spde.oracle.bessel import bessel_k

    >>> x = 1.0
    >>> abs(bessel_k(0.5, x) - math.sqrt(math.pi / (2 * x)) * math.exp(-x)) < 1e-14
    True

The module contains the following functions:
- `bessel_k`: K_nu(x) for real order and positive argument.
"""

import numpy as np
from scipy.special import kv

from rational_spde.errors import ValidationError


def bessel_k(nu: float, x):
    """K_nu(x), vectorized over x.

    Args:
        nu (float): Real order; K is even in nu.
        x: Positive argument(s).

    Raises:
        ValidationError: When an argument is not positive.

    Returns:
        float | np.ndarray: The values, a float for scalar x.
    """
    values = np.asarray(x, dtype=float)
    if np.any(~(values > 0)):
        raise ValidationError("Bessel K needs positive arguments")
    result = kv(abs(float(nu)), values)
    return float(result) if result.ndim == 0 else result
