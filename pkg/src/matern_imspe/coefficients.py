"""Exact integer and rational coefficients behind the closed-form integrals.

Everything here is computed with Python integers and
:class:`fractions.Fraction`; nothing is converted to floating point.  The
evaluator modules convert once per order and cache the result.
"""

from __future__ import annotations

import csv
import io
import json
import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence

from .errors import OrderOutOfRangeError

DEFAULT_P_MAX = 16
PMAX_ENV_VAR = "MATERN_IMSPE_PMAX"

# Rows of OEIS A001498 (signless Bessel numbers of the first kind) for
# nu = 3/2, 5/2, 7/2, 9/2, keyed by p = nu - 1/2, in increasing-index order.
OEIS_A001498_ROWS = {
    1: (1, 6, 15, 15),
    2: (1, 15, 105, 420, 945, 945),
    3: (1, 28, 378, 3150, 17325, 62370, 135135, 135135),
    4: (1, 45, 990, 13860, 135135, 945945, 4729725, 16216200, 34459425, 34459425),
}


def get_p_max() -> int:
    """Current upper bound on the order, honouring ``MATERN_IMSPE_PMAX``."""
    raw = os.environ.get(PMAX_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_P_MAX
    try:
        value = int(raw)
    except ValueError:
        raise OrderOutOfRangeError(f"{PMAX_ENV_VAR}={raw!r} is not an integer") from None
    if value < 0:
        raise OrderOutOfRangeError(f"{PMAX_ENV_VAR} must be >= 0, got {value}")
    return value


@dataclass(frozen=True)
class MaternOrder:
    """Class parameter ``p`` of the Matérn kernel with ``nu = p + 1/2``."""

    p: int
    limit: int | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if isinstance(self.p, bool) or not isinstance(self.p, int):
            raise OrderOutOfRangeError(f"order p must be an int, got {self.p!r}")
        bound = get_p_max() if self.limit is None else self.limit
        if not 0 <= self.p <= bound:
            raise OrderOutOfRangeError(f"order p={self.p} outside 0..{bound}")

    @property
    def nu(self) -> Fraction:
        return Fraction(2 * self.p + 1, 2)

    def __int__(self):
        return self.p

    def __index__(self):
        return self.p


def as_order(p) -> int:
    """Validate ``p`` (int or :class:`MaternOrder`) and return it as an int."""
    if isinstance(p, MaternOrder):
        return p.p
    return MaternOrder(p).p


def double_factorial(n: int) -> int:
    """``n!!`` with the conventions ``0!! = (-1)!! = 1``."""
    if n < -1:
        raise ValueError(f"double factorial undefined for n={n}")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def kernel_series_coefficients(p: int) -> tuple[int, ...]:
    """Integers ``(2p-j)! 2^j / ((p-j)! j!)`` for ``j = 0..p``.

    Multiplied by ``p!/(2p)!`` these are the coefficients of ``s^j`` in the
    polynomial factor of the Matérn correlation, ``s = sqrt((2p+1) theta) r``.
    """
    return tuple(
        factorial(2 * p - j) * 2**j // (factorial(p - j) * factorial(j)) for j in range(p + 1)
    )


@dataclass(frozen=True)
class CoefficientSet:
    """Exact coefficients of the single-kernel integral for one order ``p``.

    ``b[j] = (2p-j)! 2^j / (2^p (p-j)!)`` for ``0 <= j <= p`` and
    ``c[k] = (a0 - b[0] - ... - b[k]) / (k+1)!`` for ``0 <= k <= p-1``.
    For ``p = 0`` both sequences are empty.
    """

    p: int
    a0: int
    b: tuple[int, ...]
    c: tuple[int, ...]
    prefactor_denominator: int

    @property
    def polynomial(self) -> tuple[int, ...]:
        """Coefficients of ``1, s, ..., s^p`` multiplying ``exp(-s)``.

        This is ``(a0, c[0], ..., c[p-1])``; the last entry is always 1.
        """
        return (self.a0,) + self.c

    def b_row(self) -> tuple[int, ...]:
        return (self.p, self.a0) + self.b

    def polynomial_row(self) -> tuple[int, ...]:
        return (self.p, self.a0) + self.polynomial


@lru_cache(maxsize=None)
def _coefficients(p: int) -> CoefficientSet:
    a0 = 2**p * factorial(p)
    if p == 0:
        return CoefficientSet(0, a0, (), (), 2 * double_factorial(-1))
    b = []
    for j in range(p + 1):
        num = factorial(2 * p - j) * 2**j
        den = 2**p * factorial(p - j)
        if num % den:
            raise ArithmeticError(f"b_{j}({p}) is not an integer")
        b.append(num // den)
    c = []
    partial = 0
    for k in range(p):
        partial += b[k]
        num = a0 - partial
        q, r = divmod(num, factorial(k + 1))
        if r:
            raise ArithmeticError(f"c_{k}({p}) is not an integer")
        c.append(q)
    return CoefficientSet(
        p=p,
        a0=a0,
        b=tuple(b),
        c=tuple(c),
        prefactor_denominator=2 * double_factorial(2 * p - 1),
    )


def make_coefficients(p) -> CoefficientSet:
    """Exact a0, b_j, c_k for order ``p`` (``0 <= p <= P_MAX``)."""
    return _coefficients(as_order(p))


# ---------------------------------------------------------------------------
# identity checks


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of an exhaustive exact check of one identity."""

    identity: str
    cases: int
    failures: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "cases": self.cases,
            "ok": self.ok,
            "failures": [list(map(str, f)) for f in self.failures],
        }


def _check_range(p_max: int) -> int:
    bound = get_p_max()
    if not 0 <= p_max <= bound:
        raise OrderOutOfRangeError(f"p_max={p_max} outside 0..{bound}")
    return p_max


def verify_double_factorial_identity(p_max: int) -> VerificationReport:
    """Check ``(2p)!/p! == (2p-1)!! 2^p`` for every ``0 <= p <= p_max``."""
    _check_range(p_max)
    failures = []
    for p in range(p_max + 1):
        lhs = Fraction(factorial(2 * p), factorial(p))
        rhs = double_factorial(2 * p - 1) * 2**p
        if lhs != rhs:
            failures.append((p, lhs, rhs))
    return VerificationReport("double-factorial", p_max + 1, tuple(failures))


def verify_companion_binomial_identity(p_max: int) -> VerificationReport:
    """Check ``sum_j (2p-j)!/(p-j)! 2^j == 4^p p!`` for ``0 <= p <= p_max``."""
    _check_range(p_max)
    failures = []
    for p in range(p_max + 1):
        lhs = sum(Fraction(factorial(2 * p - j), factorial(p - j)) * 2**j for j in range(p + 1))
        rhs = 4**p * factorial(p)
        if lhs != rhs:
            failures.append((p, lhs, rhs))
    return VerificationReport("companion-binomial", p_max + 1, tuple(failures))


def fubini_sides(f: Sequence, g: Sequence) -> tuple[Fraction, Fraction]:
    """Both sides of the triangular summation-order swap.

    Returns ``(sum_j f[j] sum_{m<=j} g[m], sum_m g[m] sum_{j>=m} f[j])``
    evaluated in exact rational arithmetic; ``f`` and ``g`` must have the
    same length ``p + 1``.
    """
    if len(f) != len(g):
        raise ValueError("f and g must have equal length")
    f = [Fraction(v) for v in f]
    g = [Fraction(v) for v in g]
    n = len(f)
    lhs = sum((f[j] * sum(g[: j + 1], Fraction(0)) for j in range(n)), Fraction(0))
    rhs = sum((g[m] * sum(f[m:], Fraction(0)) for m in range(n)), Fraction(0))
    return lhs, rhs


def verify_fubini_identity(trials: int = 100, max_p: int = 8, seed: int = 0) -> VerificationReport:
    """Check the summation swap on ``trials`` random rational sequence pairs."""
    rng = random.Random(seed)
    failures = []
    for _ in range(trials):
        p = rng.randint(0, max_p)
        f = [Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 10**4)) for _ in range(p + 1)]
        g = [Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 10**4)) for _ in range(p + 1)]
        lhs, rhs = fubini_sides(f, g)
        if lhs != rhs:
            failures.append((p, lhs, rhs))
    return VerificationReport("fubini", trials, tuple(failures))


# ---------------------------------------------------------------------------
# Bessel numbers


def bessel_numbers(n: int) -> tuple[int, ...]:
    """Row ``n`` of the signless Bessel numbers of the first kind (A001498).

    Entry ``k`` is ``(n+k)! / (2^k k! (n-k)!)``, the coefficient of ``x^k``
    in the Bessel polynomial ``y_n(x)``.
    """
    return tuple(
        factorial(n + k) // (2**k * factorial(k) * factorial(n - k)) for k in range(n + 1)
    )


def _trunc_exp_coeffs(m: int) -> list[Fraction]:
    return [Fraction(1, factorial(t)) for t in range(m + 1)]


@lru_cache(maxsize=None)
def _delta_bracket_exact(p: int) -> tuple[Fraction, ...]:
    # Coefficients of B^n, n = 0..2p+1, of the exp(-B/2) group, including the
    # global [p!/(2p)!]^2 factor.
    coeffs = [Fraction(0)] * (2 * p + 2)
    scale = Fraction(factorial(p), factorial(2 * p)) ** 2
    for j in range(p + 1):
        for k in range(p + 1):
            for l in range(k + 1):
                m = j + k - l
                w = Fraction(
                    factorial(2 * p - j) * factorial(2 * p - k) * factorial(m),
                    4 * factorial(p - j) * factorial(j) * factorial(p - k)
                    * factorial(l) * factorial(k - l),
                )
                w *= scale
                sign_l = -1 if l % 2 else 1
                coeffs[l] += w
                for t, cf in enumerate(_trunc_exp_coeffs(m)):
                    coeffs[l + t] += w * sign_l * cf
                sign_kl = -1 if (k + l) % 2 else 1
                coeffs[j + k + 1] += w * sign_kl * Fraction(1, factorial(m + 1))
    return tuple(coeffs)


def bessel_row(p) -> tuple[int, ...]:
    """Normalised integer coefficients of the exp(-B/2) group of the product integral.

    The group polynomial is rewritten in ``B' = B/2 = sqrt((2p+1) theta)|b-a|``
    and divided by its leading coefficient.  Returns ``[g_0, ..., g_{2p+1}]``
    in increasing powers of ``B'``; the conjecture under test is that this
    is the reversed Bessel-number row ``2p + 1``.
    """
    p = as_order(p)
    if p < 1:
        raise OrderOutOfRangeError("bessel_row requires p >= 1")
    raw = _delta_bracket_exact(p)
    scaled = [c * 2**n for n, c in enumerate(raw)]
    lead = scaled[-1]
    normalised = [c / lead for c in scaled]
    if any(c.denominator != 1 for c in normalised):
        raise ArithmeticError(f"normalised bracket for p={p} is not integral: {normalised}")
    return tuple(int(c) for c in normalised)


@dataclass(frozen=True)
class ConjectureCheck:
    """Result of comparing ``bessel_row`` with Bessel numbers for one order.

    ``bessel`` is computed from the closed formula; ``fixture`` is the
    embedded OEIS row when one exists for this order (``p <= 4``).
    """

    p: int
    computed: tuple[int, ...]
    bessel: tuple[int, ...]
    fixture: tuple[int, ...] | None

    @property
    def matches_bessel(self) -> bool:
        return tuple(reversed(self.computed)) == self.bessel

    @property
    def matches_fixture(self) -> bool | None:
        if self.fixture is None:
            return None
        return tuple(reversed(self.computed)) == self.fixture

    @property
    def ok(self) -> bool:
        return self.matches_bessel and self.matches_fixture is not False


def check_bessel_conjecture(p_max: int) -> list[ConjectureCheck]:
    """Conjecture check (not a proof) for ``1 <= p <= p_max``."""
    _check_range(p_max)
    return [
        ConjectureCheck(p, bessel_row(p), bessel_numbers(2 * p + 1), OEIS_A001498_ROWS.get(p))
        for p in range(1, p_max + 1)
    ]


# ---------------------------------------------------------------------------
# table export


def coefficient_table_csv(orders: Sequence[int]) -> str:
    """CSV with columns ``p, a0, b_0..b_P, c_0..c_{P-1}``; short rows padded blank."""
    sets = [make_coefficients(p) for p in orders]
    width = max((s.p for s in sets), default=0)
    header = ["p", "a0"] + [f"b_{j}" for j in range(width + 1)] + [f"c_{k}" for k in range(width)]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for s in sets:
        b = list(s.b) + [""] * (width + 1 - len(s.b))
        c = list(s.c) + [""] * (width - len(s.c))
        writer.writerow([s.p, s.a0] + b + c)
    return buf.getvalue()


def coefficient_table_json(orders: Sequence[int]) -> str:
    rows = []
    for p in orders:
        s = make_coefficients(p)
        rows.append(
            {
                "p": s.p,
                "a0": s.a0,
                "b": list(s.b),
                "c": list(s.c),
                "prefactor_denominator": s.prefactor_denominator,
            }
        )
    return json.dumps(rows)
