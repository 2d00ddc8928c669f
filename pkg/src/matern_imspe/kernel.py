"""Odd-half-integer Matérn correlation functions."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from .coefficients import as_order, kernel_series_coefficients
from .errors import DomainError


def check_theta(theta) -> float:
    """Return ``theta`` as a float, raising :class:`DomainError` unless finite and > 0."""
    try:
        value = float(theta)
    except (TypeError, ValueError):
        raise DomainError(f"theta must be a real number, got {theta!r}") from None
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"theta must be finite and > 0, got {theta!r}")
    return value


def scale(p: int, theta: float) -> float:
    """``sqrt((2p+1) theta)``, the inverse decay length used throughout."""
    return math.sqrt((2 * p + 1) * theta)


@lru_cache(maxsize=None)
def _float_coefficients(p: int) -> tuple[float, ...]:
    norm = Fraction(factorial(p), factorial(2 * p))
    return tuple(float(norm * c) for c in kernel_series_coefficients(p))


def matern_correlation(p, theta, r):
    """Matérn correlation with ``nu = p + 1/2`` at distance ``r``.

    Evaluates ``(p!/(2p)!) sum_j (2p-j)! 2^j / ((p-j)! j!) s^j exp(-s)``
    with ``s = sqrt((2p+1) theta) r``.  ``r`` may be a scalar or an array;
    the return type follows it.

    Raises
    ------
    DomainError
        If ``theta`` is not finite and positive or any ``r`` is negative
        or non-finite.
    """
    p = as_order(p)
    theta = check_theta(theta)
    r_arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(r_arr)) or np.any(r_arr < 0):
        raise DomainError("distance r must be finite and >= 0")
    s = scale(p, theta) * r_arr
    poly = np.zeros_like(s)
    for coef in reversed(_float_coefficients(p)):
        poly = poly * s + coef
    out = poly * np.exp(-s)
    if out.ndim == 0:
        return float(out)
    return out


def correlation_matrix(p, theta_per_dim, points) -> np.ndarray:
    """Separable correlation matrix ``C[i, j] = prod_k K(|x_ik - x_jk|)``."""
    pts = np.asarray(points, dtype=float)
    n, d = pts.shape
    C = np.ones((n, n))
    for k in range(d):
        diff = np.abs(pts[:, k][:, None] - pts[:, k][None, :])
        C *= matern_correlation(p, theta_per_dim[k], diff)
    # exactly symmetric with unit diagonal: |x_i - x_j| is order-independent
    # and the constant kernel coefficient converts to exactly 1.0
    return C
