"""Closed-form normalised integral of one Matérn correlation over [-1, 1].

``I(a) = (1/2) int_{-1}^{1} K(|a - x|) dx``.  With ``s = sqrt((2p+1) theta)``
and ``u = s (1 +/- a)`` the closed form is

    I = [F(s(1+a)) + F(s(1-a))] / (2 (2p-1)!! s),
    F(u) = a0 - (a0 + c0 u + c1 u^2 + ... + c_{p-1} u^p) exp(-u),

one term per side of the kink at ``x = a``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from .coefficients import as_order, make_coefficients
from .errors import DimensionMismatchError, DomainError
from .kernel import check_theta, scale
from .result import LIMIT_THETA, NEAR_LIMIT_THETA, IntegralResult

# F(u) switches from the positive series to direct evaluation at this u.
_SERIES_CUTOFF = 1.0
_SERIES_TERMS = 60


def check_coordinate(x, name="a") -> float:
    try:
        value = float(x)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a real number, got {x!r}") from None
    if not math.isfinite(value) or not -1.0 <= value <= 1.0:
        raise DomainError(f"{name} must lie in [-1, 1], got {x!r}")
    return value


@lru_cache(maxsize=None)
def _tables(p: int):
    cs = make_coefficients(p)
    poly = tuple(float(c) for c in cs.polynomial)
    # a0 e^u - poly(u) = sum_{m>=1} d_m u^m with d_m = (b_0 + ... + b_{m-1})/m!
    # for m <= p and a0/m! beyond; every d_m is positive.
    series = []
    partial = 0
    for m in range(1, _SERIES_TERMS + 1):
        if m <= p:
            partial += cs.b[m - 1]
            series.append(float(Fraction(partial, factorial(m))))
        else:
            series.append(float(Fraction(cs.a0, factorial(m))))
    return float(cs.a0), poly, tuple(series), float(cs.prefactor_denominator)


def _branch(p: int, u: float) -> float:
    a0, poly, series, _ = _tables(p)
    if u < _SERIES_CUTOFF:
        total = 0.0
        power = 1.0
        for d in series:
            power *= u
            term = d * power
            total += term
            if term <= 1e-17 * total:
                break
        return total * math.exp(-u)
    acc = 0.0
    for coef in reversed(poly):
        acc = acc * u + coef
    return a0 - acc * math.exp(-u)


def evaluate_single(p, theta, a) -> IntegralResult:
    """Closed-form ``I`` with evaluation metadata; see :func:`single_integral`."""
    p = as_order(p)
    theta = check_theta(theta)
    a = check_coordinate(a)
    near = theta < NEAR_LIMIT_THETA
    if theta < LIMIT_THETA:
        return IntegralResult(1.0, p, theta, (a,), "theta-limit", near)
    s = scale(p, theta)
    # both branches from |a| so that I(a) == I(-a) bit for bit
    m = abs(a)
    denom = _tables(p)[3]
    value = (_branch(p, s * (1.0 + m)) + _branch(p, s * (1.0 - m))) / (denom * s)
    return IntegralResult(value, p, theta, (a,), "closed-form", near)


def single_integral(p, theta, a) -> float:
    """``(1/2) int_{-1}^{1} K_{p+1/2}(|a - x|) dx`` in closed form.

    Parameters
    ----------
    p : int or MaternOrder
        Matérn order, ``nu = p + 1/2``.
    theta : float
        Inverse squared length scale, ``theta = 1/l^2 > 0``.
    a : float
        Design coordinate in ``[-1, 1]``.

    Returns
    -------
    float
        Value in ``(0, 1]``; exactly 1.0 when ``theta < 1e-12``.
    """
    return evaluate_single(p, theta, a).value


def single_integral_vector(p, theta_per_dim, design) -> np.ndarray:
    """Array ``out[i, k] = single_integral(p, theta_k, x_ik)`` for an ``n x d`` design."""
    pts = _points(design)
    thetas = _thetas(theta_per_dim, pts.shape[1])
    out = np.empty(pts.shape)
    for i in range(pts.shape[0]):
        for k in range(pts.shape[1]):
            out[i, k] = single_integral(p, thetas[k], pts[i, k])
    return out


def _points(design) -> np.ndarray:
    pts = getattr(design, "points", design)
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
        raise DomainError(f"design must be an n x d array, got shape {pts.shape}")
    return pts


def _thetas(theta_per_dim, d: int) -> list[float]:
    thetas = [check_theta(t) for t in np.atleast_1d(np.asarray(theta_per_dim, dtype=float))]
    if len(thetas) != d:
        raise DimensionMismatchError(f"got {len(thetas)} theta values for a {d}-dimensional design")
    return thetas
