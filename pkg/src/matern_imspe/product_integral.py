"""Closed-form integral of a product of two Matérn correlations over [-1, 1].

``J(a, b) = (1/2) int_{-1}^{1} K(|a - x|) K(|b - x|) dx`` for ``a <= b``.
With ``s = sqrt((2p+1) theta)``, ``A+ = 2s(1+a)``, ``A- = 2s(1-a)``,
``B = 2s(b-a)``, ``m = j+k-l`` and ``T_m(x) = sum_{t<=m} x^t/t!``:

    J = [p!/(2p)!]^2 / s * sum_{j,k<=p} sum_{l<=k} w_jkl * (
            {B^l + (-1)^l B^l T_m(B) + (-1)^(k+l) B^(j+k+1)/(m+1)!} E_d
          - B^l T_m(A+) E+
          - (-1)^l B^l T_m(A-) E- )

where ``w_jkl = (2p-j)!(2p-k)! m! / (4 (p-j)! j! (p-k)! l! (k-l)!)``,
``E_d = exp(-B/2)`` and ``E+/- = exp(-2s(1 +/- (a+b)/2))``.

Note the minus sign on the ``E-`` group.  With ``+`` there the formula
fails against quadrature already at ``p = 0``, where the exact result is
``[(2+B)E_d - E+ - E-]/(4s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import mpmath
import numpy as np

from .coefficients import as_order
from .errors import OrderOutOfRangeError
from .kernel import check_theta, scale
from .result import LIMIT_THETA, NEAR_LIMIT_THETA, IntegralResult
from .single_integral import _points, _thetas, check_coordinate

METHODS = ("auto", "consolidated", "direct", "mp")
DEFAULT_MP_DPS = 60
# "auto" re-evaluates in mpmath when sum|terms| / |sum terms| exceeds this,
# i.e. when the float result may have lost more than about three digits.
CANCELLATION_LIMIT = 1e3


@dataclass(frozen=True)
class ProductTermTable:
    """Exact per-``(j, k, l)`` weights ``w_jkl`` and the global prefactor."""

    p: int
    weights: dict
    prefactor: Fraction

    @property
    def size(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class ScaledArguments:
    A_plus: float
    A_minus: float
    B: float


@dataclass(frozen=True)
class ConsolidatedCoefficients:
    """Exact polynomial brackets of the three exponential groups.

    ``delta[n]`` multiplies ``B^n E_d``; ``plus[l][m]`` multiplies
    ``B^l A+^m E+`` and ``minus[l][m]`` multiplies ``B^l A-^m E-``.  The
    global ``[p!/(2p)!]^2`` factor is included, so

        J = (sum delta B^n E_d - sum plus B^l A+^m E+ - sum minus B^l A-^m E-) / s.

    ``minus[l][m] == (-1)^l plus[l][m]``, i.e. the ``E-`` bracket is the
    ``E+`` bracket evaluated at ``(A-, -B)``.
    """

    p: int
    delta: tuple
    plus: tuple
    minus: tuple

    def scaled(self, factor) -> "ConsolidatedCoefficients":
        """Every coefficient multiplied by ``factor`` (for comparison with rescaled displays)."""
        f = Fraction(factor)
        return ConsolidatedCoefficients(
            self.p,
            tuple(c * f for c in self.delta),
            tuple(tuple(c * f for c in row) for row in self.plus),
            tuple(tuple(c * f for c in row) for row in self.minus),
        )


def _weight(p: int, j: int, k: int, l: int) -> Fraction:
    return Fraction(
        factorial(2 * p - j) * factorial(2 * p - k) * factorial(j + k - l),
        4 * factorial(p - j) * factorial(j) * factorial(p - k) * factorial(l) * factorial(k - l),
    )


@lru_cache(maxsize=None)
def _term_table(p: int) -> ProductTermTable:
    weights = {
        (j, k, l): _weight(p, j, k, l)
        for j in range(p + 1)
        for k in range(p + 1)
        for l in range(k + 1)
    }
    return ProductTermTable(p, weights, Fraction(factorial(p), factorial(2 * p)) ** 2)


def product_term_table(p) -> ProductTermTable:
    return _term_table(as_order(p))


@lru_cache(maxsize=None)
def _consolidated(p: int) -> ConsolidatedCoefficients:
    table = _term_table(p)
    delta = [Fraction(0)] * (2 * p + 2)
    plus = [[Fraction(0)] * (2 * p + 1) for _ in range(p + 1)]
    for (j, k, l), w in table.weights.items():
        w = w * table.prefactor
        m = j + k - l
        sign_l = (-1) ** l
        delta[l] += w
        for t in range(m + 1):
            inv = Fraction(1, factorial(t))
            delta[l + t] += sign_l * w * inv
            plus[l][t] += w * inv
        delta[j + k + 1] += (-1) ** (k + l) * w * Fraction(1, factorial(m + 1))
    minus = [[(-1) ** l * c for c in row] for l, row in enumerate(plus)]
    return ConsolidatedCoefficients(
        p,
        tuple(delta),
        tuple(tuple(r) for r in plus),
        tuple(tuple(r) for r in minus),
    )


def product_integral_consolidated_coeffs(p) -> ConsolidatedCoefficients:
    """Exact consolidated brackets for ``1 <= p <= P_MAX``."""
    p = as_order(p)
    if p < 1:
        raise OrderOutOfRangeError("consolidated coefficients require p >= 1")
    return _consolidated(p)


@lru_cache(maxsize=None)
def _float_consolidated(p: int):
    cc = _consolidated(p)
    delta = np.array([float(c) for c in cc.delta])
    l_idx, m_idx, coef = zip(
        *((l, m, float(c)) for l, row in enumerate(cc.plus) for m, c in enumerate(row) if c)
    )
    l_idx, m_idx, coef = np.array(l_idx), np.array(m_idx), np.array(coef)
    return delta, l_idx, m_idx, coef, coef * (-1.0) ** l_idx


@lru_cache(maxsize=None)
def _float_terms(p: int):
    table = _term_table(p)
    inv_fact = [1.0 / factorial(t) for t in range(2 * p + 2)]
    terms = [
        (j, k, l, float(w * table.prefactor)) for (j, k, l), w in sorted(table.weights.items())
    ]
    return terms, inv_fact


def _canonical(a: float, b: float) -> tuple[float, float]:
    # J(a, b) = J(b, a) = J(-b, -a); pick a <= b with a + b <= 0
    if b < a:
        a, b = b, a
    if a + b > 0.0:
        a, b = -b, -a
    return a, b


def scaled_arguments(p, theta, a, b) -> ScaledArguments:
    p = as_order(p)
    s = scale(p, check_theta(theta))
    a, b = _canonical(check_coordinate(a, "a"), check_coordinate(b, "b"))
    return ScaledArguments(2 * s * (1 + a), 2 * s * (1 - a), 2 * s * (b - a))


def _exponents(s, a, b, exp):
    return exp(-s * (b - a)), exp(-2 * s * (1 + (a + b) / 2)), exp(-2 * s * (1 - (a + b) / 2))


def _consolidated_value(p, s, a, b):
    delta, l_idx, m_idx, plus, minus = _float_consolidated(p)
    Ap, Am, B = 2 * s * (1 + a), 2 * s * (1 - a), 2 * s * (b - a)
    Ed, Ep, Em = _exponents(s, a, b, math.exp)
    powers = np.arange(2 * p + 2)
    with np.errstate(over="ignore", invalid="ignore"):
        Bp = B**powers
        terms = np.concatenate([
            delta * Bp * Ed,
            -plus * Bp[l_idx] * (Ap**powers)[m_idx] * Ep,
            -minus * Bp[l_idx] * (Am**powers)[m_idx] * Em,
        ])
    total = math.fsum(terms.tolist())
    magnitude = float(np.abs(terms).sum())
    ratio = magnitude / abs(total) if total else math.inf
    return total / s, ratio


def _trunc_exp(x, m, inv_fact):
    out = 0.0
    power = 1.0
    for t in range(m + 1):
        out += power * inv_fact[t]
        power *= x
    return out


def _direct_value(p, s, a, b):
    table, inv_fact = _float_terms(p)
    Ap, Am, B = 2 * s * (1 + a), 2 * s * (1 - a), 2 * s * (b - a)
    Ed, Ep, Em = _exponents(s, a, b, math.exp)
    terms = []
    for j, k, l, w in table:
        m = j + k - l
        Bl = B**l
        sign_l = -1.0 if l % 2 else 1.0
        terms.append(w * Bl * Ed)
        terms.append(w * sign_l * Bl * _trunc_exp(B, m, inv_fact) * Ed)
        sign_kl = -1.0 if (k + l) % 2 else 1.0
        terms.append(w * sign_kl * B ** (j + k + 1) * inv_fact[m + 1] * Ed)
        terms.append(-w * Bl * _trunc_exp(Ap, m, inv_fact) * Ep)
        terms.append(-w * sign_l * Bl * _trunc_exp(Am, m, inv_fact) * Em)
    total = math.fsum(terms)
    magnitude = math.fsum(abs(t) for t in terms)
    ratio = magnitude / abs(total) if total else math.inf
    return total / s, ratio


@lru_cache(maxsize=None)
def _mp_coefficients(p: int, dps: int):
    cc = _consolidated(p)
    with mpmath.workdps(dps):
        def q(c):
            return mpmath.mpf(c.numerator) / c.denominator

        delta = [q(c) for c in cc.delta]
        plus = [(l, m, q(c)) for l, row in enumerate(cc.plus) for m, c in enumerate(row) if c]
    return delta, plus


def _mp_value(p, theta, a, b, dps):
    delta, plus = _mp_coefficients(p, dps)
    with mpmath.workdps(dps):
        s = mpmath.sqrt((2 * p + 1) * mpmath.mpf(theta))
        a_, b_ = mpmath.mpf(a), mpmath.mpf(b)
        Ap, Am, B = 2 * s * (1 + a_), 2 * s * (1 - a_), 2 * s * (b_ - a_)
        Ed, Ep, Em = _exponents(s, a_, b_, mpmath.exp)
        Bp, App, Amp = ([x**n for n in range(2 * p + 2)] for x in (B, Ap, Am))
        total = mpmath.fsum(c * Bp[n] for n, c in enumerate(delta)) * Ed
        total -= mpmath.fsum(
            c * Bp[l] * (App[m] * Ep + Amp[m] * Em if l % 2 == 0 else App[m] * Ep - Amp[m] * Em)
            for l, m, c in plus
        )
        return float(total / s)


def evaluate_product(p, theta, a, b, method="auto", dps=DEFAULT_MP_DPS) -> IntegralResult:
    """Closed-form ``J`` with evaluation metadata; see :func:`product_integral`."""
    p = as_order(p)
    theta = check_theta(theta)
    a = check_coordinate(a, "a")
    b = check_coordinate(b, "b")
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    near = theta < NEAR_LIMIT_THETA
    if theta < LIMIT_THETA:
        return IntegralResult(1.0, p, theta, (a, b), "theta-limit", near)
    lo, hi = _canonical(a, b)
    s = scale(p, theta)
    if method == "mp":
        value = _mp_value(p, theta, lo, hi, dps)
        tag = "mp"
    elif method == "direct":
        value, _ = _direct_value(p, s, lo, hi)
        tag = "direct-sum"
    else:
        value, ratio = _consolidated_value(p, s, lo, hi)
        tag = "consolidated"
        if method == "auto" and not ratio <= CANCELLATION_LIMIT:
            value = _mp_value(p, theta, lo, hi, dps)
            tag = "mp"
    if not math.isfinite(value):
        value = _mp_value(p, theta, lo, hi, dps)
        tag = "mp"
    return IntegralResult(value, p, theta, (a, b), tag, near)


def product_integral(p, theta, a, b, method="auto") -> float:
    """``(1/2) int_{-1}^{1} K(|a - x|) K(|b - x|) dx`` in closed form.

    Parameters
    ----------
    p : int or MaternOrder
        Matérn order, ``nu = p + 1/2``.
    theta : float
        Inverse squared length scale (> 0).
    a, b : float
        Coordinates in ``[-1, 1]``, in either order.
    method : {"auto", "consolidated", "direct", "mp"}
        ``"consolidated"`` sums the precomputed per-order polynomial
        brackets with compensated summation; ``"direct"`` performs the full
        triple sum over ``(j, k, l)``; ``"mp"`` evaluates the exact brackets
        in mpmath at 60 digits.  ``"auto"`` (default) is ``"consolidated"``
        falling back to ``"mp"`` when the three exponential groups cancel
        badly, which happens for large ``p`` and ``theta``.
    """
    return evaluate_product(p, theta, a, b, method=method).value


def product_integral_matrix(p, theta_per_dim, design, method="auto") -> np.ndarray:
    """``R[i, j] = prod_k product_integral(p, theta_k, x_ik, x_jk)``, symmetric by construction."""
    pts = _points(design)
    n, d = pts.shape
    thetas = _thetas(theta_per_dim, d)
    R = np.ones((n, n))
    for i in range(n):
        for j in range(i, n):
            v = 1.0
            for k in range(d):
                v *= product_integral(p, thetas[k], pts[i, k], pts[j, k], method=method)
            R[i, j] = R[j, i] = v
    return R
