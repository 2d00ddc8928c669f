"""Correlation and integral matrices of a design, and its IMSPE.

The kernel is separable across dimensions, so every matrix entry is a
product over coordinates of one-dimensional quantities:

* ``C[i, j]  = prod_k K(|x_ik - x_jk|)``
* ``R0[i]    = prod_k I(x_ik)``
* ``R[i, j]  = prod_k J(x_ik, x_jk)``

For simple kriging with unit process variance the integrated mean squared
prediction error over ``[-1, 1]^d`` (normalised by its volume) is
``1 - trace(C^{-1} R)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.linalg.lapack import dpocon

from .coefficients import as_order
from .errors import DesignParseError, DomainError, SingularDesignError
from .kernel import correlation_matrix
from .product_integral import product_integral_matrix
from .single_integral import _thetas, single_integral_vector

RCOND_LIMIT = 1e-14


@dataclass(frozen=True)
class Design:
    """``n`` points in ``[-1, 1]^d``, stored as an ``(n, d)`` float array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DomainError(f"design must be n x d with n, d >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)) or np.any(np.abs(pts) > 1.0):
            raise DomainError("design coordinates must lie in [-1, 1]")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def duplicate_pairs(self) -> list[tuple[int, int]]:
        """Index pairs ``(i, j)``, ``i < j``, of identical points (these make ``C`` singular)."""
        seen = {}
        pairs = []
        for i, row in enumerate(map(tuple, self.points)):
            if row in seen:
                pairs.extend((j, i) for j in seen[row])
                seen[row].append(i)
            else:
                seen[row] = [i]
        return pairs


def load_design(path) -> Design:
    """Read a design CSV with header ``x1,...,xd`` and one point per row.

    Raises
    ------
    DesignParseError
        On a malformed header, ragged or non-numeric rows, or coordinates
        outside ``[-1, 1]``.  The error carries the 1-based line number and
        the column name.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DesignParseError(f"{path}: empty file", line=1) from None
        expected = [f"x{k}" for k in range(1, len(header) + 1)]
        if [h.strip() for h in header] != expected:
            raise DesignParseError(
                f"{path}:1: header must be {','.join(expected)}, got {','.join(header)}", line=1
            )
        d = len(header)
        rows = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != d:
                raise DesignParseError(f"{path}:{line}: expected {d} values, got {len(row)}", line=line)
            values = []
            for name, cell in zip(expected, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise DesignParseError(
                        f"{path}:{line}: column {name}: {cell!r} is not a number",
                        line=line, column=name,
                    ) from None
                if not math.isfinite(v) or not -1.0 <= v <= 1.0:
                    raise DesignParseError(
                        f"{path}:{line}: column {name}: value {cell.strip()} outside [-1, 1]",
                        line=line, column=name,
                    )
                values.append(v)
            rows.append(values)
    if not rows:
        raise DesignParseError(f"{path}: no design points", line=2)
    return Design(np.array(rows))


@dataclass(frozen=True)
class ImspeMatrices:
    C: np.ndarray
    R0: np.ndarray
    R: np.ndarray
    imspe: float
    condition_estimate: float

    def to_dict(self, p, theta, include_matrices=False) -> dict:
        out = {
            "p": int(p),
            "theta": [float(t) for t in theta],
            "n": int(self.C.shape[0]),
            "d": len(theta),
            "imspe": float(self.imspe),
            "condition_estimate": float(self.condition_estimate),
        }
        if include_matrices:
            out["matrices"] = {
                "C": self.C.tolist(),
                "R0": self.R0.tolist(),
                "R": self.R.tolist(),
            }
        return out


def _as_design(design) -> Design:
    return design if isinstance(design, Design) else Design(design)


def assemble(p, theta_per_dim, design) -> ImspeMatrices:
    """Build ``C``, ``R0``, ``R`` and ``imspe = 1 - trace(C^{-1} R)``.

    Raises
    ------
    SingularDesignError
        If ``C`` is not positive definite or its reciprocal condition
        estimate is below ``RCOND_LIMIT``.
    DimensionMismatchError
        If the number of theta values differs from the design dimension.
    """
    p = as_order(p)
    design = _as_design(design)
    thetas = _thetas(theta_per_dim, design.d)
    C = correlation_matrix(p, thetas, design.points)
    R0 = np.prod(single_integral_vector(p, thetas, design.points), axis=1)
    R = product_integral_matrix(p, thetas, design.points)

    # The solve is done in two canonical row orders, lexicographic in x and
    # in -x, and the traces are averaged.  Any permutation or reflection of
    # the design maps onto the same pair of ordered problems, so the result
    # is invariant bit for bit instead of only up to the solve's rounding
    # error (which is about cond(C) * eps).
    keys = design.points.T[::-1]
    traces, rconds = [], []
    for order in (np.lexsort(keys), np.lexsort(-keys)):
        idx = np.ix_(order, order)
        trace, rcond = _trace_solve(C[idx], R[idx], design)
        traces.append(trace)
        rconds.append(rcond)
    rcond = min(rconds)
    return ImspeMatrices(C, R0, R, 1.0 - 0.5 * (traces[0] + traces[1]), 1.0 / rcond)


def _trace_solve(C, R, design):
    try:
        factor = cho_factor(C, lower=False, check_finite=True)
    except np.linalg.LinAlgError:
        dup = design.duplicate_pairs()
        raise SingularDesignError(
            "correlation matrix is not positive definite"
            + (f" (duplicate points {dup})" if dup else ""),
            rcond=0.0,
        ) from None
    anorm = float(np.max(np.sum(np.abs(C), axis=0)))
    rcond, info = dpocon(factor[0], anorm, uplo="U")
    if info != 0 or not rcond >= RCOND_LIMIT:
        raise SingularDesignError(
            f"correlation matrix is ill-conditioned: reciprocal condition estimate {rcond:.3g}"
            f" < {RCOND_LIMIT:g}",
            rcond=float(rcond),
        )
    return float(np.trace(cho_solve(factor, R))), float(rcond)
