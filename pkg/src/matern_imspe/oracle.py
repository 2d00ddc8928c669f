"""Independent numerical references for the closed forms.

Quadrature splits [-1, 1] at every kink (``x = a``, ``x = b``) and grades
panels geometrically away from each kink on the kernel's decay length
``1/sqrt((2p+1) theta)``; each panel uses fixed-order Gauss-Legendre.  The
integrand is evaluated from the original Matérn series (index ``i`` with
powers ``p - i``), not from the re-indexed coefficients the closed forms
use.

Monte-Carlo IMSPE uses numpy's PCG64 bit generator, whose output stream is
specified and platform independent for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from .coefficients import as_order
from .errors import DomainError, SingularDesignError
from .kernel import check_theta
from .single_integral import _points, _thetas, check_coordinate

DEFAULT_NODES = 64


@dataclass(frozen=True)
class QuadratureSpec:
    """Panel layout for piecewise Gauss-Legendre quadrature on [-1, 1]."""

    panel_boundaries: tuple[float, ...]
    nodes_per_panel: int = DEFAULT_NODES

    def __post_init__(self):
        bounds = tuple(float(x) for x in self.panel_boundaries)
        object.__setattr__(self, "panel_boundaries", bounds)
        if self.nodes_per_panel < 2:
            raise DomainError("nodes_per_panel must be >= 2")
        if len(bounds) < 2 or bounds[0] != -1.0 or bounds[-1] != 1.0:
            raise DomainError("panel boundaries must start at -1 and end at 1")
        if any(hi <= lo for lo, hi in zip(bounds, bounds[1:])):
            raise DomainError("panel boundaries must be strictly increasing")

    def refined(self) -> "QuadratureSpec":
        """Same panels with twice the nodes."""
        return QuadratureSpec(self.panel_boundaries, 2 * self.nodes_per_panel)


def kink_spec(p, theta, kinks, nodes_per_panel=DEFAULT_NODES) -> QuadratureSpec:
    """Panels split at ``kinks`` and graded at ``2^i / s`` away from each one."""
    p = as_order(p)
    s = math.sqrt((2 * p + 1) * check_theta(theta))
    points = {-1.0, 1.0}
    for kink in kinks:
        kink = float(kink)
        points.add(kink)
        h = 1.0 / s
        while h < 2.0:
            for x in (kink - h, kink + h):
                if -1.0 < x < 1.0:
                    points.add(x)
            h *= 2.0
    return QuadratureSpec(tuple(sorted(points)), nodes_per_panel)


@lru_cache(maxsize=None)
def _legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def matern_reference(p: int, theta: float, r):
    """Matérn correlation in the original ``i``-indexed series form.

    ``exp(-sqrt(2 nu) r / l) * p!/(2p)! * sum_i (p+i)!/(i!(p-i)!) (sqrt(8 nu) r / l)^(p-i)``
    with ``nu = p + 1/2`` and ``l = 1/sqrt(theta)``.
    """
    r = np.asarray(r, dtype=float)
    nu2 = 2 * p + 1
    inv_len = math.sqrt(theta)
    z = math.sqrt(4 * nu2) * r * inv_len
    total = np.zeros_like(r)
    for i in range(p + 1):
        total = total + factorial(p + i) / (factorial(i) * factorial(p - i)) * z ** (p - i)
    return np.exp(-math.sqrt(nu2) * r * inv_len) * total * (factorial(p) / factorial(2 * p))


def _integrate(f, spec: QuadratureSpec) -> float:
    x, w = _legendre(spec.nodes_per_panel)
    bounds = spec.panel_boundaries
    partial = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        half = 0.5 * (hi - lo)
        xs = half * x + 0.5 * (hi + lo)
        partial.append(half * float(np.dot(w, f(xs))))
    return math.fsum(partial)


def _require_kinks(spec: QuadratureSpec, kinks):
    for kink in kinks:
        if float(kink) not in spec.panel_boundaries:
            raise DomainError(f"quadrature spec lacks a panel boundary at kink x={kink}")


def quad_single(p, theta, a, spec: QuadratureSpec | None = None) -> float:
    """``(1/2) int K(|a - x|) dx`` by kink-split Gauss-Legendre quadrature."""
    p = as_order(p)
    theta = check_theta(theta)
    a = check_coordinate(a)
    if spec is None:
        spec = kink_spec(p, theta, (a,))
    _require_kinks(spec, (a,))
    return 0.5 * _integrate(lambda xs: matern_reference(p, theta, np.abs(a - xs)), spec)


def quad_product(p, theta, a, b, spec: QuadratureSpec | None = None) -> float:
    """``(1/2) int K(|a - x|) K(|b - x|) dx`` by kink-split Gauss-Legendre quadrature."""
    p = as_order(p)
    theta = check_theta(theta)
    a = check_coordinate(a, "a")
    b = check_coordinate(b, "b")
    if spec is None:
        spec = kink_spec(p, theta, (a, b))
    _require_kinks(spec, (a, b))

    def integrand(xs):
        return matern_reference(p, theta, np.abs(a - xs)) * matern_reference(p, theta, np.abs(b - xs))

    return 0.5 * _integrate(integrand, spec)


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    n_samples: int
    seed: int


def mc_imspe(p, theta_per_dim, design, n_samples: int, seed: int = 0,
             chunk: int = 100_000) -> MonteCarloEstimate:
    """Monte-Carlo average of the simple-kriging MSPE over ``[-1, 1]^d``.

    ``MSPE(x) = 1 - k(x)^T C^{-1} k(x)`` with ``x ~ Uniform([-1, 1]^d)``.

    Raises
    ------
    SingularDesignError
        If the design correlation matrix is not numerically positive definite.
    """
    p = as_order(p)
    pts = _points(design)
    n, d = pts.shape
    thetas = _thetas(theta_per_dim, d)
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")

    C = np.ones((n, n))
    for k in range(d):
        C *= matern_reference(p, thetas[k], np.abs(pts[:, k][:, None] - pts[:, k][None, :]))
    try:
        L = cholesky(C, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularDesignError(f"correlation matrix is not positive definite: {exc}") from None

    rng = np.random.Generator(np.random.PCG64(seed))
    total = 0.0
    total_sq = 0.0
    remaining = n_samples
    while remaining:
        m = min(chunk, remaining)
        remaining -= m
        X = rng.uniform(-1.0, 1.0, size=(m, d))
        kx = np.ones((m, n))
        for k in range(d):
            kx *= matern_reference(p, thetas[k], np.abs(X[:, k][:, None] - pts[:, k][None, :]))
        v = solve_triangular(L, kx.T, lower=True)
        mspe = 1.0 - np.einsum("ij,ij->j", v, v)
        total += float(mspe.sum())
        total_sq += float(np.dot(mspe, mspe))
    mean = total / n_samples
    if n_samples > 1:
        var = max(total_sq - n_samples * mean * mean, 0.0) / (n_samples - 1)
        stderr = math.sqrt(var / n_samples)
    else:
        stderr = math.nan
    return MonteCarloEstimate(mean, stderr, n_samples, seed)
