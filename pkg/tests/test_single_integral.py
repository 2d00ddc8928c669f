import math
import random

import numpy as np
import pytest
from scipy.integrate import quad

from matern_imspe import (
    DimensionMismatchError,
    DomainError,
    evaluate_single,
    make_coefficients,
    matern_correlation,
    single_integral,
    single_integral_vector,
)
from matern_imspe.oracle import kink_spec, quad_single

# (a0; a0, c_0, ..., c_{p-1}) and the denominator D of 1/(D sqrt((2p+1) theta))
GOLDEN = {
    1: ((2,), (2, 1), 2),
    2: ((8,), (8, 5, 1), 6),
    3: ((48,), (48, 33, 9, 1), 30),
    4: ((384,), (384, 279, 87, 14, 1), 210),
}


def golden_form(p, theta, a):
    (a0,), poly, denom = GOLDEN[p]
    s = math.sqrt((2 * p + 1) * theta)
    total = 0.0
    for u in (s * (1 + a), s * (1 - a)):
        total += a0 - sum(c * u**k for k, c in enumerate(poly)) * math.exp(-u)
    return total / (denom * s)


@pytest.mark.parametrize("p", sorted(GOLDEN))
def test_generated_vectors_match_golden(p):
    c = make_coefficients(p)
    (a0,), poly, denom = GOLDEN[p]
    assert c.a0 == a0
    assert c.polynomial == poly
    assert c.prefactor_denominator == denom


@pytest.mark.parametrize("p", sorted(GOLDEN))
@pytest.mark.parametrize("theta", [0.5, 3.0, 50.0])
@pytest.mark.parametrize("a", [-0.9, -0.2, 0.0, 0.45])
def test_golden_forms_numerically(p, theta, a):
    assert single_integral(p, theta, a) == pytest.approx(golden_form(p, theta, a), rel=1e-13)


def test_p1_bracketed_form():
    # the same integral written with explicit 1 - e^{-u} brackets
    theta, a = 0.7, 0.35
    s = math.sqrt(3 * theta)
    up, um = s * (1 + a), s * (1 - a)
    ref = (2 * ((1 - math.exp(-up)) + (1 - math.exp(-um)))
           - s * ((1 + a) * math.exp(-up) + (1 - a) * math.exp(-um))) / (2 * s)
    assert single_integral(1, theta, a) == pytest.approx(ref, rel=1e-14)


def test_p0_hand_integral():
    theta, a = 2.0, -0.3
    s = math.sqrt(theta)
    ref = (2 - math.exp(-s * (1 + a)) - math.exp(-s * (1 - a))) / (2 * s)
    assert single_integral(0, theta, a) == pytest.approx(ref, rel=1e-14)


@pytest.mark.parametrize("p", range(0, 9))
@pytest.mark.parametrize("theta", [1e-3, 1e-1, 1.0, 10.0, 1e3])
def test_against_scipy_quad(p, theta):
    for a in np.linspace(-1, 1, 9):
        ref, _ = quad(lambda x: 0.5 * matern_correlation(p, theta, abs(a - x)), -1, 1,
                      points=[a] if -1 < a < 1 else None, epsabs=0, epsrel=1e-13, limit=200)
        assert single_integral(p, theta, a) == pytest.approx(ref, rel=1e-11)


@pytest.mark.parametrize("p", [0, 2, 5, 8, 12, 16])
def test_against_oracle(p):
    for theta in (1e-2, 1.0, 1e2):
        for a in np.linspace(-1, 1, 11):
            ref = quad_single(p, theta, a, kink_spec(p, theta, (a,), 128))
            assert abs(single_integral(p, theta, a) - ref) <= 1e-9 * ref


def test_reflection_symmetry_exact():
    rng = random.Random(3)
    for _ in range(500):
        p = rng.randint(0, 16)
        theta = 10 ** rng.uniform(-6, 4)
        a = rng.uniform(-1, 1)
        assert single_integral(p, theta, a) == single_integral(p, theta, -a)


def test_bounds():
    rng = random.Random(4)
    for _ in range(500):
        p = rng.randint(0, 16)
        v = single_integral(p, 10 ** rng.uniform(-10, 5), rng.uniform(-1, 1))
        assert 0 < v <= 1


def test_decreasing_in_theta():
    vals = [single_integral(3, t, 0.2) for t in np.logspace(-4, 4, 40)]
    assert all(x > y for x, y in zip(vals, vals[1:]))


@pytest.mark.parametrize("p", range(0, 17))
def test_small_theta_limit(p):
    res = evaluate_single(p, 1e-8, 0.3)
    assert abs(res.value - 1) <= 1e-3
    assert res.method == "closed-form"
    assert not res.near_limit
    tiny = evaluate_single(p, 1e-13, 0.3)
    assert tiny.value == 1.0 and tiny.method == "theta-limit" and tiny.near_limit


def test_near_limit_flag():
    res = evaluate_single(1, 1e-10, 0.3)
    assert res.near_limit and res.method == "closed-form"
    # K_{3/2} ~ 1 - (3 theta / 2) r^2, and (1/2) int (a - x)^2 dx = a^2 + 1/3
    assert res.value == pytest.approx(1 - 1.5e-10 * (0.09 + 1 / 3), abs=1e-15)


def test_large_theta_asymptote():
    # away from the ends the integral tends to (1/2) int K = a0 / (D s)
    p, theta = 3, 1e6
    c = make_coefficients(p)
    s = math.sqrt(7 * theta)
    assert single_integral(p, theta, 0.1) == pytest.approx(2 * c.a0 / (c.prefactor_denominator * s), rel=1e-14)


def test_endpoint_values():
    # at a = 1 half the mass of the kernel falls outside [-1, 1]
    for p in range(0, 6):
        v1 = single_integral(p, 1e4, 1.0)
        v0 = single_integral(p, 1e4, 0.0)
        assert v1 == pytest.approx(v0 / 2, rel=1e-12)


@pytest.mark.parametrize("bad", [1.5, -1.0001, math.nan])
def test_bad_coordinate(bad):
    with pytest.raises(DomainError):
        single_integral(1, 1.0, bad)


def test_vector_delegates():
    pts = np.array([[0.1, -0.7], [0.9, 0.0]])
    out = single_integral_vector(2, [0.5, 3.0], pts)
    assert out.shape == (2, 2)
    assert out[1, 0] == single_integral(2, 0.5, 0.9)
    assert out[0, 1] == single_integral(2, 3.0, -0.7)
    with pytest.raises(DimensionMismatchError):
        single_integral_vector(2, [0.5], pts)
