"""Integral-norm primitives on grid densities.

All integrals use the trapezoid weights of the shared grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import AnalyticDensity, Grid, GridDensity
from .errors import GridMismatch, NumericBlowup, RangeError, SupportViolation

FISHER_FLOOR = 1e-12
FISHER_MASKED_MASS = 1e-6
SUPPORT_FLOOR = 1e-12
LOG_FLOOR = 1e-300


def _check_grid(p: GridDensity, q: GridDensity) -> Grid:
    if p.grid != q.grid:
        raise GridMismatch(f"densities live on different grids: {p.grid} vs {q.grid}")
    return p.grid


@dataclass(frozen=True)
class NormReport:
    l1: float
    l2: float
    linf: float
    computed_on: Grid

    def to_dict(self) -> dict:
        return {"l1": self.l1, "l2": self.l2, "linf": self.linf}


def lp_diff(p: GridDensity, q: GridDensity, ord: int = 1) -> float:
    """(integral |p - q|^ord)^(1/ord) for ord in {1, 2}."""
    grid = _check_grid(p, q)
    diff = np.abs(p.values - q.values)
    if ord == 1:
        return grid.integrate(diff)
    if ord == 2:
        return math.sqrt(grid.integrate(diff * diff))
    raise RangeError(f"ord must be 1 or 2, got {ord!r}")


def linf_diff(p: GridDensity, q: GridDensity) -> float:
    _check_grid(p, q)
    return float(np.max(np.abs(p.values - q.values)))


def positive_part_mass(p: GridDensity, q: GridDensity) -> float:
    """integral of (q - p)^+."""
    grid = _check_grid(p, q)
    return grid.integrate(np.maximum(q.values - p.values, 0.0))


def norm_report(p: GridDensity, q: GridDensity) -> NormReport:
    return NormReport(lp_diff(p, q, 1), lp_diff(p, q, 2), linf_diff(p, q), p.grid)


def func_total_variation(p: GridDensity) -> float:
    """Discrete variation sum |p[i+1] - p[i]|.

    Exact for the sampled function; a lower bound of the continuum variation
    that converges to integral |p'| as the grid is refined.
    """
    return float(np.sum(np.abs(np.diff(p.values))))


def fisher_information(d: GridDensity | AnalyticDensity) -> float:
    """J(p) = integral p'^2 / p.

    On grids p' comes from second-order central differences (one-sided at the
    ends) and points with p < 1e-12 are dropped from the integral.
    """
    if not isinstance(d, GridDensity):
        return float(d.fisher())
    p = d.values
    dp = np.gradient(p, d.grid.dx, edge_order=2)
    keep = p >= FISHER_FLOOR
    masked = d.grid.integrate(np.where(keep, 0.0, p))
    if masked > FISHER_MASKED_MASS:
        raise NumericBlowup(f"{masked:.2e} of the mass lies below the Fisher floor")
    integrand = np.zeros_like(p)
    integrand[keep] = dp[keep] ** 2 / p[keep]
    return d.grid.integrate(integrand)


def differential_entropy(p: GridDensity) -> float:
    """-integral p ln p with 0 ln 0 = 0."""
    v = p.values
    pos = v > 0
    integrand = np.zeros_like(v)
    integrand[pos] = v[pos] * np.log(v[pos])
    return -p.grid.integrate(integrand)


def log_density_moment(x_density: GridDensity, y_density: GridDensity, s: float) -> float:
    """(E_X |ln p_Y(X)|^s)^(1/s)."""
    grid = _check_grid(x_density, y_density)
    if not s > 1:
        raise RangeError("s must be > 1")
    px, py = x_density.values, y_density.values
    bad = (px > SUPPORT_FLOOR) & (py < LOG_FLOOR)
    if np.any(bad):
        where = grid.points[bad]
        raise SupportViolation(
            f"p_Y vanishes on {bad.sum()} points where p_X > {SUPPORT_FLOOR} (e.g. x={where[0]:.4g})"
        )
    use = (px > 0) & (py > 0)
    integrand = np.zeros_like(px)
    integrand[use] = px[use] * np.abs(np.log(py[use])) ** s
    return grid.integrate(integrand) ** (1.0 / s)
