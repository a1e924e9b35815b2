"""
Numerical inversion of Laplace transforms by Euler summation of the Bromwich
trapezoid series (Abate–Whitt). Used for scale functions without a closed form.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import comb

from config import Config

logger = logging.getLogger(__name__)


def euler_inversion(transform: Callable[[np.ndarray], np.ndarray], t: float,
                    terms: Optional[int] = None, euler_terms: Optional[int] = None,
                    a: Optional[float] = None) -> Tuple[float, float]:
    """
    Invert a Laplace transform at a single point.

    Args:
        transform: F(s), accepting a complex numpy array with Re s > 0
        t: time point (> 0)
        terms: number of plain series terms before averaging
        euler_terms: order of the binomial (Euler) average
        a: contour abscissa parameter; the discretisation error is about e^{-a}

    Returns:
        (value, error_estimate) where the error estimate is the change when one
        more series term enters the Euler average
    """
    n = terms if terms is not None else Config.get_laplace_inversion_terms()
    m = euler_terms if euler_terms is not None else Config.LAPLACE_INVERSION_EULER_TERMS
    a = a if a is not None else Config.LAPLACE_INVERSION_A

    x = a / (2.0 * t)
    k = np.arange(1, n + m + 2)
    z = x + 1j * np.pi * k / t

    f0 = np.real(transform(np.array([x + 0j])))[0]
    terms_k = np.real(transform(z)) * np.where(k % 2 == 0, 1.0, -1.0)
    partial = 0.5 * f0 + np.cumsum(terms_k)

    weights = comb(m, np.arange(m + 1)) / 2.0 ** m
    scale = np.exp(a / 2.0) / t
    # partial[i] holds the sum through k = i + 1
    first = scale * np.dot(weights, partial[n - 1:n + m])
    second = scale * np.dot(weights, partial[n:n + m + 1])
    return float(first), float(abs(first - second))
