"""Grid sweeps comparing the closed forms against quadrature."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .oracle import kink_spec, quad_product, quad_single
from .product_integral import product_integral
from .single_integral import single_integral

DEFAULT_THETAS = (1e-2, 1.0, 1e2)
GRID_11 = tuple(float(x) for x in np.round(np.linspace(-1.0, 1.0, 11), 12))


@dataclass
class CellReport:
    p: int
    theta: float
    single_max_rel_err: float = 0.0
    product_max_rel_err: float = 0.0
    worst_single: tuple = ()
    worst_product: tuple = ()

    @property
    def max_rel_err(self) -> float:
        return max(self.single_max_rel_err, self.product_max_rel_err)


@dataclass
class SweepReport:
    p_values: tuple
    thetas: tuple
    rtol: float
    nodes: int
    seed: int
    cells: list = field(default_factory=list)

    @property
    def max_rel_err(self) -> float:
        return max((c.max_rel_err for c in self.cells), default=0.0)

    @property
    def ok(self) -> bool:
        return self.max_rel_err <= self.rtol

    def to_dict(self) -> dict:
        return {
            "p_values": list(self.p_values),
            "thetas": list(self.thetas),
            "rtol": self.rtol,
            "nodes_per_panel": self.nodes,
            "seed": self.seed,
            "max_rel_err": self.max_rel_err,
            "ok": self.ok,
            "cells": [
                {
                    "p": c.p,
                    "theta": c.theta,
                    "single_max_rel_err": c.single_max_rel_err,
                    "product_max_rel_err": c.product_max_rel_err,
                    "ok": c.max_rel_err <= self.rtol,
                }
                for c in self.cells
            ],
        }


def _rel(closed: float, ref: float) -> float:
    return abs(closed - ref) / abs(ref)


def sweep(p_values, thetas=DEFAULT_THETAS, grid=GRID_11, rtol=1e-9, nodes=128,
          seed=0, extra_pairs=0, products=True) -> SweepReport:
    """Max relative error of ``I`` and ``J`` against quadrature per ``(p, theta)`` cell.

    ``I`` is checked at every grid point and ``J`` at every ordered pair of
    grid points; ``extra_pairs`` additional ``(a, b)`` pairs per cell are
    drawn uniformly from ``[-1, 1]^2`` with ``random.Random(seed)``.
    """
    rng = random.Random(seed)
    report = SweepReport(tuple(p_values), tuple(thetas), rtol, nodes, seed)
    for p in p_values:
        for theta in thetas:
            cell = CellReport(p, theta)
            for a in grid:
                ref = quad_single(p, theta, a, kink_spec(p, theta, (a,), nodes))
                err = _rel(single_integral(p, theta, a), ref)
                if err >= cell.single_max_rel_err:
                    cell.single_max_rel_err, cell.worst_single = err, (a,)
            if products:
                pairs = [(a, b) for a in grid for b in grid]
                pairs += [(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(extra_pairs)]
                for a, b in pairs:
                    ref = quad_product(p, theta, a, b, kink_spec(p, theta, (a, b), nodes))
                    err = _rel(product_integral(p, theta, a, b), ref)
                    if err >= cell.product_max_rel_err:
                        cell.product_max_rel_err, cell.worst_product = err, (a, b)
            report.cells.append(cell)
    return report
